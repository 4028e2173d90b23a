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

#include "mupax/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mupax/distribution.hpp"
#include "mupax/parallel.hpp"
#include "mupax/stats.hpp"

namespace mupax {

namespace {

// Fixed so that the reduction order, and therefore every rounded sum, does not
// depend on the worker count.
constexpr std::size_t kReduceBlock = 4096;

}  // namespace

OracleResult enumerate(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid, double w,
                       std::size_t workers, std::size_t batch_size) {
  const std::size_t m = grid.size();
  if (m < 2) fail(ErrorKind::kTooFewChunks, "oracle needs at least 2 chunks");
  if (m > kOracleMaxChunks) {
    fail(ErrorKind::kTooManyChunks, std::to_string(m) + " chunks exceeds the enumeration limit of " +
                                        std::to_string(kOracleMaxChunks));
  }
  if (std::isnan(w) || w < 0.0) fail(ErrorKind::kInvalidConfig, "threshold W must be >= 0");
  if (x.shape() != grid.input_shape()) fail(ErrorKind::kShapeMismatch, "grid was built for a different shape");
  require_nonnegative(x);
  batch_size = std::max<std::size_t>(batch_size, 1);
  workers = effective_workers(workers, predictor.max_concurrency());

  OracleResult r;
  r.m = m;
  r.w = w;
  const std::uint32_t first = 1;
  const std::uint32_t last = (std::uint32_t{1} << m) - 2;  // inclusive
  const std::size_t count = last - first + 1;
  r.table.resize(count);

  std::vector<double> prob_by_k(m + 1);
  for (std::size_t k = 0; k <= m; ++k) prob_by_k[k] = StratifiedUniform::probability(m, k);

  const std::size_t batches = (count + batch_size - 1) / batch_size;
  parallel_blocks(batches, workers, [&](std::size_t b) {
    const std::size_t lo = b * batch_size;
    const std::size_t hi = std::min(lo + batch_size, count);
    std::vector<InputTensor> batch(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint32_t mask = first + static_cast<std::uint32_t>(i);
      apply_mask_into(x, SelectionVector::from_mask(mask, m), grid, batch[i - lo]);
    }
    const auto losses = predictor.evaluate(batch);
    check_losses(losses, batch.size());
    for (std::size_t i = lo; i < hi; ++i) {
      auto& rec = r.table[i];
      rec.mask = first + static_cast<std::uint32_t>(i);
      rec.probability = prob_by_k[static_cast<std::size_t>(std::popcount(rec.mask))];
      rec.mu = losses[i - lo];
      rec.accepted = rec.mu <= w;
    }
  });

  for (const auto& rec : r.table) {
    if (rec.accepted) {
      r.p_w += rec.probability;
      ++r.accepted_masks;
    }
  }
  if (!(r.p_w > 0.0)) fail(ErrorKind::kZeroAcceptance, "no selection vector has mu <= W");

  // chi(a) = sum over accepted s of (P(s)/p_W) mu'_s X^s(a), summed literally
  // per coordinate.
  const std::size_t volume = x.size();
  const std::size_t blocks = (count + kReduceBlock - 1) / kReduceBlock;
  std::vector<std::vector<double>> partial(blocks);
  parallel_blocks(blocks, workers, [&](std::size_t b) {
    auto& acc = partial[b];
    acc.assign(volume, 0.0);
    const std::size_t hi = std::min((b + 1) * kReduceBlock, count);
    for (std::size_t i = b * kReduceBlock; i < hi; ++i) {
      const auto& rec = r.table[i];
      if (!rec.accepted) continue;
      const double coef = rec.probability / r.p_w * weight(rec.mu);
      for (std::size_t j = 0; j < m; ++j) {
        if (!((rec.mask >> j) & 1u)) continue;
        for (auto c : grid.coordinates(j)) acc[c] += coef * static_cast<double>(x[c]);
      }
    }
  });
  r.chi = RealTensor::zeros(x.shape());
  for (const auto& acc : partial) {
    for (std::size_t c = 0; c < volume; ++c) r.chi[c] += acc[c];
  }

  std::vector<double> kept(m, 0.0), kept_w(m, 0.0);
  for (const auto& rec : r.table) {
    if (!rec.accepted) continue;
    const double q = rec.probability / r.p_w;
    const double wq = q * weight(rec.mu);
    for (std::size_t j = 0; j < m; ++j) {
      if ((rec.mask >> j) & 1u) {
        kept[j] += q;
        kept_w[j] += wq;
      }
    }
  }
  r.retention = kept;
  r.goodness.assign(m, std::nullopt);
  for (std::size_t j = 0; j < m; ++j) {
    if (kept[j] > 0.0) r.goodness[j] = kept_w[j] / kept[j];
  }

  double worst_relative = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double ag = r.goodness[j] ? r.retention[j] * *r.goodness[j] : 0.0;
    for (auto c : grid.coordinates(j)) {
      const double diff = std::abs(r.chi[c] - static_cast<double>(x[c]) * ag);
      r.identity_residual = std::max(r.identity_residual, diff);
      worst_relative = std::max(worst_relative, diff / std::max(1.0, std::abs(r.chi[c])));
    }
  }
  if (worst_relative > kOracleIdentityTolerance) {
    throw std::logic_error("oracle decomposition identity violated: " + std::to_string(worst_relative));
  }
  return r;
}

SaliencyMap oracle_as_map(const OracleResult& oracle) {
  SaliencyMap map;
  map.chi = oracle.chi;
  map.se = RealTensor::zeros(oracle.chi.shape());
  map.n = oracle.accepted_masks;
  map.w_used = oracle.w;
  map.p_hat = oracle.p_w;
  return map;
}

nlohmann::json mask_table_json(const OracleResult& oracle) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& rec : oracle.table) {
    rows.push_back({{"s", SelectionVector::from_mask(rec.mask, oracle.m).to_string()},
                    {"probability", rec.probability},
                    {"mu", rec.mu},
                    {"accepted", rec.accepted}});
  }
  nlohmann::json chunks = nlohmann::json::array();
  for (std::size_t j = 0; j < oracle.m; ++j) {
    chunks.push_back({{"chunk", j},
                      {"retention", oracle.retention[j]},
                      {"goodness", oracle.goodness[j] ? nlohmann::json(*oracle.goodness[j]) : nlohmann::json(nullptr)}});
  }
  return {{"distribution", std::string(StratifiedUniform::kName)},
          {"m", oracle.m},
          {"w", oracle.w},
          {"p_w", oracle.p_w},
          {"accepted_masks", oracle.accepted_masks},
          {"identity_residual", oracle.identity_residual},
          {"chunks", std::move(chunks)},
          {"masks", std::move(rows)}};
}

CrosscheckReport crosscheck(const RealTensor& chi_exact, double w_exact, const SaliencyMap& mc, double k,
                            double rel_tolerance) {
  if (chi_exact.shape() != mc.chi.shape()) fail(ErrorKind::kConfigMismatch, "oracle and Monte Carlo shapes differ");
  if (!(w_exact == mc.w_used)) {
    fail(ErrorKind::kConfigMismatch,
         "thresholds differ: oracle W=" + std::to_string(w_exact) + ", Monte Carlo W=" + std::to_string(mc.w_used));
  }
  CrosscheckReport rep;
  rep.k = k;
  const std::size_t n = chi_exact.size();
  std::size_t covered = 0;
  double sum_abs = 0.0, sum_sq = 0.0, sum_se = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double err = std::abs(mc.chi[c] - chi_exact[c]);
    rep.max_abs_error = std::max(rep.max_abs_error, err);
    sum_abs += err;
    sum_sq += err * err;
    sum_se += mc.se[c];
    if (err <= k * mc.se[c] + rel_tolerance * std::max(1.0, std::abs(chi_exact[c]))) ++covered;
  }
  rep.mean_abs_error = sum_abs / static_cast<double>(n);
  rep.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  rep.mean_se = sum_se / static_cast<double>(n);
  rep.coverage = static_cast<double>(covered) / static_cast<double>(n);
  return rep;
}

CrosscheckReport crosscheck(const OracleResult& oracle, const SaliencyMap& mc, double k, double rel_tolerance) {
  return crosscheck(oracle.chi, oracle.w, mc, k, rel_tolerance);
}

double convergence_slope(std::span<const std::pair<double, double>> n_and_rmse) { return loglog_slope(n_and_rmse); }

}  // namespace mupax
