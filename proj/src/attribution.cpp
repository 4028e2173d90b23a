/*
 * Copyright 2026 The mupax project contributors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mupax/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mupax/stats.hpp"

namespace mupax {

Accumulator::Accumulator(std::shared_ptr<const InputTensor> reference, ChunkGrid grid)
    : reference_(std::move(reference)),
      grid_(std::move(grid)),
      retained_(grid_.size(), 0),
      weight_sum_(grid_.size()),
      weight_sq_sum_(grid_.size()) {
  if (!reference_ || reference_->shape() != grid_.input_shape()) {
    fail(ErrorKind::kShapeMismatch, "accumulator reference does not match grid");
  }
}

Accumulator::Accumulator(const InputTensor& reference, ChunkGrid grid)
    : Accumulator(std::make_shared<const InputTensor>(reference), std::move(grid)) {}

void Accumulator::add(const SelectionVector& s, double mu) {
  if (s.size() != grid_.size()) fail(ErrorKind::kShapeMismatch, "selection length differs from chunk count");
  if (!(mu >= 0.0) || !std::isfinite(mu)) fail(ErrorKind::kInvalidLoss, "loss must be finite and >= 0");
  const double w = weight(mu);
  const double w2 = w * w;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!s[j]) continue;
    ++retained_[j];
    weight_sum_[j].add(w);
    weight_sq_sum_[j].add(w2);
  }
  ++n_;
}

void Accumulator::add(const InputTensor& masked, const SelectionVector& s, double mu) {
  if (masked.shape() != reference_->shape()) fail(ErrorKind::kShapeMismatch, "masked sample shape differs from input");
  add(s, mu);
}

void Accumulator::merge(const Accumulator& other) {
  if (!(grid_ == other.grid_)) fail(ErrorKind::kShapeMismatch, "cannot merge accumulators over different grids");
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    retained_[j] += other.retained_[j];
    weight_sum_[j].merge(other.weight_sum_[j]);
    weight_sq_sum_[j].merge(other.weight_sq_sum_[j]);
  }
  n_ += other.n_;
}

bool operator==(const Accumulator& a, const Accumulator& b) {
  return a.grid_ == b.grid_ && a.n_ == b.n_ && a.retained_ == b.retained_ && a.weight_sum_ == b.weight_sum_ &&
         a.weight_sq_sum_ == b.weight_sq_sum_ && *a.reference_ == *b.reference_;
}

RealTensor Accumulator::sum_wx() const {
  RealTensor out = RealTensor::zeros(grid_.input_shape());
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double s = weight_sum_[j].value();
    for (auto c : grid_.coordinates(j)) out[c] = static_cast<double>((*reference_)[c]) * s;
  }
  return out;
}

RealTensor Accumulator::sum_wx2() const {
  RealTensor out = RealTensor::zeros(grid_.input_shape());
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double s = weight_sq_sum_[j].value();
    for (auto c : grid_.coordinates(j)) {
      const double x = (*reference_)[c];
      out[c] = x * x * s;
    }
  }
  return out;
}

SaliencyMap finalize(const Accumulator& acc, double w_used, double p_hat) {
  if (acc.n() == 0) fail(ErrorKind::kEmptyAccumulator, "no accepted samples");
  const double n = static_cast<double>(acc.n());
  const auto& grid = acc.grid();
  const auto& x = acc.reference();
  SaliencyMap map;
  map.chi = RealTensor::zeros(grid.input_shape());
  map.se = RealTensor::zeros(grid.input_shape());
  map.n = acc.n();
  map.w_used = w_used;
  map.p_hat = p_hat;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mean_w = acc.weight_sum(j) / n;
    const double mean_w2 = acc.weight_sq_sum(j) / n;
    for (auto c : grid.coordinates(j)) {
      const double xv = x[c];
      const double chi = xv * mean_w;
      const double var = std::max(0.0, xv * xv * mean_w2 - chi * chi);
      map.chi[c] = chi;
      map.se[c] = std::sqrt(var / n);
      if (chi < 0.0 || chi > xv) throw std::logic_error("chi outside [0, X] at coordinate " + std::to_string(c));
    }
  }
  return map;
}

Decomposition decompose(const Accumulator& acc) {
  if (acc.n() == 0) fail(ErrorKind::kEmptyAccumulator, "no accepted samples");
  const auto& grid = acc.grid();
  const double n = static_cast<double>(acc.n());
  Decomposition d;
  d.retention.resize(grid.size());
  d.goodness.resize(grid.size());
  const SaliencyMap map = finalize(acc, 0.0, 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto r = acc.retained_count(j);
    d.retention[j] = static_cast<double>(r) / n;
    if (r == 0) continue;
    const double g = acc.weight_sum(j) / static_cast<double>(r);
    d.goodness[j] = g;
    for (auto c : grid.coordinates(j)) {
      const double chi = map.chi[c];
      const double rebuilt = static_cast<double>(acc.reference()[c]) * d.retention[j] * g;
      d.max_identity_residual = std::max(d.max_identity_residual, std::abs(chi - rebuilt) / std::max(1.0, std::abs(chi)));
    }
  }
  if (d.max_identity_residual > kDecompositionTolerance) {
    throw std::logic_error("decomposition identity violated: residual " + std::to_string(d.max_identity_residual));
  }
  return d;
}

SelectionVector threshold_mask(const SaliencyMap& map, const ChunkGrid& grid, double percentile) {
  if (map.chi.shape() != grid.input_shape()) fail(ErrorKind::kShapeMismatch, "saliency map does not match grid");
  const auto scores = chunk_means(map.chi.data(), grid);
  const double cut = nearest_rank(scores, percentile);
  SelectionVector keep(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) keep.set(j, scores[j] >= cut);
  return keep;
}

Explanation explain(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid, const SamplerConfig& config,
                    std::optional<double> explicit_w, bool keep_samples) {
  config.validate();
  require_nonnegative(x);
  Explanation out;
  std::uint64_t start = 0;
  if (explicit_w) {
    out.threshold = ThresholdW::explicit_value(*explicit_w);
  } else {
    Calibration cal = calibrate_threshold(predictor, x, grid, config);
    out.threshold = cal.threshold;
    out.calibration_losses = std::move(cal.losses);
    start = config.n_calibration;
  }

  Accumulator acc(x, grid);
  const auto outcome = rejection_sample(predictor, x, grid, out.threshold.w, config, start, [&](const AcceptedSample& s) {
    acc.add(s.selection, s.mu);
    if (keep_samples) out.samples.push_back(s);
  });
  out.stats = outcome.stats;
  out.partial = outcome.budget_exhausted;
  if (acc.n() == 0) {
    outcome.require_complete();
  }
  out.map = finalize(acc, out.threshold.w, out.stats.p_hat());
  out.decomposition = decompose(acc);
  return out;
}

}  // namespace mupax
