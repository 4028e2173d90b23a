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
#include <memory>
#include <optional>
#include <vector>

#include "mupax/chunking.hpp"
#include "mupax/exact_sum.hpp"
#include "mupax/sampler.hpp"

namespace mupax {

/// Inverse-error weight mu' = 1 / (mu + 1), in (0, 1].
inline double weight(double mu) { return 1.0 / (mu + 1.0); }

/// Streaming sums behind chi_n.
///
/// A masked sample equals X on retained chunks and 0 elsewhere, so
///   sum_c mu'_c Xbar^c(a)      = X(a) * sum_{c: chunk(a) kept} mu'_c
///   sum_c (mu'_c Xbar^c(a))^2  = X(a)^2 * sum_{c: chunk(a) kept} mu'_c^2
/// and the accumulator only keeps per-chunk sums. Those are exact
/// (ExactSum), so merge() is associative and commutative bit-for-bit.
class Accumulator {
 public:
  Accumulator(std::shared_ptr<const InputTensor> reference, ChunkGrid grid);
  Accumulator(const InputTensor& reference, ChunkGrid grid);

  void add(const SelectionVector& s, double mu);
  /// Checks the masked sample's shape, then behaves like add(s, mu).
  void add(const InputTensor& masked, const SelectionVector& s, double mu);
  void merge(const Accumulator& other);

  std::uint64_t n() const noexcept { return n_; }
  const InputTensor& reference() const noexcept { return *reference_; }
  const ChunkGrid& grid() const noexcept { return grid_; }

  std::uint64_t retained_count(std::size_t j) const { return retained_.at(j); }
  /// sum of mu' over samples retaining chunk j.
  double weight_sum(std::size_t j) const { return weight_sum_.at(j).value(); }
  double weight_sq_sum(std::size_t j) const { return weight_sq_sum_.at(j).value(); }

  RealTensor sum_wx() const;
  RealTensor sum_wx2() const;

  friend bool operator==(const Accumulator& a, const Accumulator& b);

 private:
  std::shared_ptr<const InputTensor> reference_;
  ChunkGrid grid_;
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> retained_;
  std::vector<ExactSum> weight_sum_;
  std::vector<ExactSum> weight_sq_sum_;
};

struct SaliencyMap {
  RealTensor chi;
  RealTensor se;
  std::uint64_t n = 0;
  double w_used = 0.0;
  double p_hat = 0.0;
};

/// chi = sum_wx / n, se = sqrt(max(0, sum_wx2/n - chi^2) / n) (biased
/// variance). Throws EmptyAccumulator when n == 0.
SaliencyMap finalize(const Accumulator& acc, double w_used, double p_hat);

struct Decomposition {
  std::vector<double> retention;                  // A_j
  std::vector<std::optional<double>> goodness;    // G_j, absent if never retained
  double max_identity_residual = 0.0;             // max |chi - X*A*G| / max(1, |chi|)
};

inline constexpr double kDecompositionTolerance = 1e-9;

/// Per-chunk A_j and G_j, checked against chi = X * A * G at every
/// coordinate whose chunk was retained at least once.
Decomposition decompose(const Accumulator& acc);

/// Keeps chunks whose mean chi is >= the nearest-rank `percentile` of the
/// chunk means (ties kept).
SelectionVector threshold_mask(const SaliencyMap& map, const ChunkGrid& grid, double percentile = 50.0);

/// End-to-end explanation of one input: calibrate (unless `explicit_w`),
/// rejection-sample, accumulate, finalize, decompose.
struct Explanation {
  SaliencyMap map;
  Decomposition decomposition;
  ThresholdW threshold;
  std::vector<double> calibration_losses;
  AcceptanceStats stats;
  bool partial = false;
  std::vector<AcceptedSample> samples;  // filled only when requested
};

Explanation explain(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid, const SamplerConfig& config,
                    std::optional<double> explicit_w = std::nullopt, bool keep_samples = false);

}  // namespace mupax
