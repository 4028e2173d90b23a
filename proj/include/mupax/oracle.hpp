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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mupax/attribution.hpp"
#include "mupax/chunking.hpp"
#include "mupax/predictor.hpp"

namespace mupax {

inline constexpr std::size_t kOracleMaxChunks = 20;
inline constexpr double kOracleIdentityTolerance = 1e-12;

struct MaskRecord {
  std::uint32_t mask = 0;  // bit j = chunk j
  double probability = 0.0;
  double mu = 0.0;
  bool accepted = false;
};

/// Exact quantities under D_W, obtained by visiting every selection vector
/// with nonzero probability under StratifiedUniform.
struct OracleResult {
  std::size_t m = 0;
  double w = 0.0;
  double p_w = 0.0;
  RealTensor chi;                              // E_{D_W}[mu' X'(a)]
  std::vector<double> retention;               // A_j
  std::vector<std::optional<double>> goodness; // E[mu' | chunk j kept]
  double identity_residual = 0.0;              // max |chi - X*A*G|
  std::uint64_t accepted_masks = 0;
  std::vector<MaskRecord> table;               // every mask in ascending order
};

/// Throws TooFewChunks (m < 2), TooManyChunks (m > 20) or ZeroAcceptance.
OracleResult enumerate(const Predictor& predictor, const InputTensor& x, const ChunkGrid& grid, double w,
                       std::size_t workers = 1, std::size_t batch_size = 64);

/// Oracle values in the shape of a saliency map (se = 0, n = accepted masks,
/// p_hat = p_W), for writing with the MPXS encoder.
SaliencyMap oracle_as_map(const OracleResult& oracle);

nlohmann::json mask_table_json(const OracleResult& oracle);

struct CrosscheckReport {
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  double rmse = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;  // fraction of coordinates with |err| <= k * se
  double k = 4.0;
};

/// Compares a Monte Carlo map to the oracle. Throws ConfigMismatch when the
/// shapes or the thresholds W differ. A coordinate is covered when
/// |err| <= k * se + rel_tolerance * max(1, |chi|); the slack matters where
/// se = 0 (chunks retained in every accepted sample with constant mu).
CrosscheckReport crosscheck(const OracleResult& oracle, const SaliencyMap& mc, double k = 4.0,
                            double rel_tolerance = 1e-12);
CrosscheckReport crosscheck(const RealTensor& chi_exact, double w_exact, const SaliencyMap& mc, double k = 4.0,
                            double rel_tolerance = 1e-12);

/// Slope of log RMSE against log n over (n, rmse) pairs.
double convergence_slope(std::span<const std::pair<double, double>> n_and_rmse);

}  // namespace mupax
