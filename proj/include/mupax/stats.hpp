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
#include <span>
#include <utility>
#include <vector>

namespace mupax {

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (rank
/// clamped to [1, n]). p must be in (0, 100].
double nearest_rank(std::span<const double> values, double percentile);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
};

MeanSd mean_sd(std::span<const double> values);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const std::pair<double, double>> points);

}  // namespace mupax
