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
#include <string_view>
#include <vector>

#include "mupax/chunking.hpp"
#include "mupax/rng.hpp"

namespace mupax {

/// The base distribution U over selection vectors, shared by the sampler and
/// the enumeration oracle so the two cannot drift apart.
///
/// k is uniform on {1, ..., m-1}, then a uniform k-subset of the m chunks is
/// retained. The all-zero and all-one vectors have probability 0, and
///   P(s) = 1 / ((m - 1) * C(m, popcount(s)))   for 1 <= popcount(s) <= m-1.
struct StratifiedUniform {
  static constexpr std::string_view kName = "stratified-uniform/k~U{1..m-1}";

  static double probability(std::size_t m, std::size_t retained);

  /// Draw into `out`; `scratch` is reused permutation storage.
  static void draw(CounterRng& rng, std::size_t m, std::vector<std::uint32_t>& scratch, SelectionVector& out);
};

/// C(n, k) as a double (exact while the value fits in 53 bits).
double binomial(std::size_t n, std::size_t k);

/// Selection vector for sample `index` under `seed`. Throws TooFewChunks for m < 2.
SelectionVector sample_selection(std::uint64_t seed, std::uint64_t index, std::size_t m);

}  // namespace mupax
