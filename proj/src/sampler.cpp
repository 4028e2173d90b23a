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

#include "mupax/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mupax/distribution.hpp"
#include "mupax/parallel.hpp"
#include "mupax/stats.hpp"

namespace mupax {

void SamplerConfig::validate() const {
  if (n_target < 1) fail(ErrorKind::kInvalidConfig, "n_target must be >= 1");
  if (!(percentile_w > 0.0 && percentile_w < 100.0)) fail(ErrorKind::kInvalidConfig, "percentile_w must be in (0, 100)");
  if (cap() < n_target) fail(ErrorKind::kInvalidConfig, "n_total_cap must be >= n_target");
  if (batch_size < 1) fail(ErrorKind::kInvalidConfig, "batch_size must be >= 1");
}

ThresholdW ThresholdW::explicit_value(double w) {
  if (std::isnan(w) || w < 0.0) fail(ErrorKind::kInvalidConfig, "threshold W must be >= 0");
  ThresholdW t;
  t.w = w;
  t.source = Source::kExplicit;
  return t;
}

void SamplingOutcome::require_complete() const {
  if (budget_exhausted) {
    fail(ErrorKind::kBudgetExhausted, "accepted " + std::to_string(stats.accepted) + " of the requested samples after " +
                                          std::to_string(stats.attempted) + " draws");
  }
}

std::vector<double> evaluate_indices(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid,
                                     std::uint64_t seed, std::uint64_t first, std::uint64_t count,
                                     std::size_t batch_size, std::size_t workers) {
  if (x.shape() != grid.input_shape()) fail(ErrorKind::kShapeMismatch, "grid was built for a different shape");
  batch_size = std::max<std::size_t>(batch_size, 1);
  std::vector<double> losses(count);
  const std::size_t batches = static_cast<std::size_t>((count + batch_size - 1) / batch_size);
  const std::size_t m = grid.size();
  parallel_blocks(batches, effective_workers(workers, predictor.max_concurrency()), [&](std::size_t b) {
    const std::uint64_t lo = first + b * batch_size;
    const std::uint64_t hi = std::min<std::uint64_t>(lo + batch_size, first + count);
    std::vector<InputTensor> batch(hi - lo);
    std::vector<std::uint32_t> scratch;
    SelectionVector s;
    for (std::uint64_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, i);
      StratifiedUniform::draw(rng, m, scratch, s);
      apply_mask_into(x, s, grid, batch[i - lo]);
    }
    const auto out = predictor.evaluate(batch);
    check_losses(out, batch.size());
    std::copy(out.begin(), out.end(), losses.begin() + static_cast<std::ptrdiff_t>(lo - first));
  });
  return losses;
}

Calibration calibrate_threshold(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid,
                                const SamplerConfig& config) {
  config.validate();
  if (config.n_calibration < 20) fail(ErrorKind::kInvalidConfig, "n_calibration must be >= 20");
  require_nonnegative(x);
  if (grid.size() < 2) fail(ErrorKind::kTooFewChunks, "need at least 2 chunks");
  Calibration cal;
  cal.losses = evaluate_indices(predictor, x, grid, config.seed, 0, config.n_calibration, config.batch_size,
                                config.workers);
  cal.threshold.w = nearest_rank(cal.losses, config.percentile_w);
  cal.threshold.source = ThresholdW::Source::kCalibrated;
  cal.threshold.percentile = config.percentile_w;
  cal.threshold.n_calibration = config.n_calibration;
  return cal;
}

SamplingOutcome rejection_sample(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid, double w,
                                 const SamplerConfig& config, std::uint64_t start_index, const SampleSink& sink) {
  config.validate();
  if (std::isnan(w) || w < 0.0) fail(ErrorKind::kInvalidConfig, "threshold W must be >= 0");
  require_nonnegative(x);
  if (grid.size() < 2) fail(ErrorKind::kTooFewChunks, "need at least 2 chunks");

  const std::size_t workers = effective_workers(config.workers, predictor.max_concurrency());
  const std::uint64_t cap = config.cap();
  const std::uint64_t min_round = static_cast<std::uint64_t>(workers) * config.batch_size;
  constexpr std::uint64_t kMaxRound = std::uint64_t{1} << 20;

  SamplingOutcome out;
  auto& st = out.stats;
  std::uint64_t next = start_index;
  AcceptedSample sample;

  while (st.accepted < config.n_target && st.attempted < cap) {
    // Size the round from the running acceptance rate so little lookahead is
    // wasted. Round size only affects `evaluations`, not what gets accepted.
    // Until something is accepted, probe with rounds that double.
    const double remaining = static_cast<double>(config.n_target - st.accepted);
    std::uint64_t round = st.attempted == 0 ? std::min<std::uint64_t>(config.n_target, 256) : st.attempted;
    if (st.accepted > 0) round = static_cast<std::uint64_t>(std::ceil(1.1 * remaining / st.p_hat()));
    round = std::clamp<std::uint64_t>(round, min_round, kMaxRound);
    round = std::min(round, cap - st.attempted);

    const auto losses = evaluate_indices(predictor, x, grid, config.seed, next, round, config.batch_size, workers);
    st.evaluations += round;
    for (std::uint64_t i = 0; i < round; ++i) {
      ++st.attempted;
      if (losses[i] <= w) {
        ++st.accepted;
        sample.index = next + i;
        sample.selection = sample_selection(config.seed, sample.index, grid.size());
        sample.mu = losses[i];
        sink(sample);
        if (st.accepted == config.n_target) break;
      }
    }
    next += round;
  }
  out.budget_exhausted = st.accepted < config.n_target;
  return out;
}

}  // namespace mupax
