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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mupax/chunking.hpp"
#include "mupax/predictor.hpp"

namespace mupax {

struct SamplerConfig {
  std::uint64_t n_target = 1000;
  std::uint64_t n_calibration = 256;
  double percentile_w = 20.0;
  /// Budget on draws in the rejection phase; 0 selects 100 * n_target.
  std::uint64_t n_total_cap = 0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  std::size_t workers = 1;

  std::uint64_t cap() const { return n_total_cap == 0 ? 100 * n_target : n_total_cap; }
  void validate() const;
};

struct ThresholdW {
  enum class Source { kCalibrated, kExplicit };

  double w = 0.0;
  Source source = Source::kExplicit;
  double percentile = 0.0;
  std::uint64_t n_calibration = 0;

  /// W >= 0; +inf is allowed for an explicit threshold (accept everything).
  static ThresholdW explicit_value(double w);
};

struct Calibration {
  ThresholdW threshold;
  std::vector<double> losses;  // indexed by sample index 0..n_calibration-1
};

struct AcceptanceStats {
  std::uint64_t attempted = 0;    // draws up to and including the last one consumed
  std::uint64_t accepted = 0;
  std::uint64_t evaluations = 0;  // predictor calls issued, including lookahead

  double p_hat() const { return attempted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempted); }
};

struct AcceptedSample {
  std::uint64_t index = 0;
  SelectionVector selection;
  double mu = 0.0;
};

struct SamplingOutcome {
  AcceptanceStats stats;
  bool budget_exhausted = false;

  /// Throws BudgetExhausted when fewer than n_target samples were accepted.
  void require_complete() const;
};

/// Losses of sample indices [first, first + count), in index order. Work is
/// split into batches of `batch_size` spread over `workers` threads.
std::vector<double> evaluate_indices(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid,
                                     std::uint64_t seed, std::uint64_t first, std::uint64_t count,
                                     std::size_t batch_size, std::size_t workers);

/// Draws sample indices 0..n_calibration-1 and sets W to the nearest-rank
/// `percentile_w` of their losses.
Calibration calibrate_threshold(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid,
                                const SamplerConfig& config);

using SampleSink = std::function<void(const AcceptedSample&)>;

/// Draws indices start_index, start_index + 1, ... and hands every draw with
/// mu <= W to `sink` in index order until n_target are accepted or the budget
/// runs out. The accepted sequence depends only on (seed, x, predictor, W),
/// never on `workers`.
SamplingOutcome rejection_sample(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid, double w,
                                 const SamplerConfig& config, std::uint64_t start_index, const SampleSink& sink);

}  // namespace mupax
