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

#include "mupax/distribution.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace mupax {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

double StratifiedUniform::probability(std::size_t m, std::size_t retained) {
  if (m < 2 || retained == 0 || retained >= m) return 0.0;
  return 1.0 / (static_cast<double>(m - 1) * binomial(m, retained));
}

void StratifiedUniform::draw(CounterRng& rng, std::size_t m, std::vector<std::uint32_t>& scratch, SelectionVector& out) {
  if (m < 2) fail(ErrorKind::kTooFewChunks, "need at least 2 chunks to exclude the degenerate masks");
  const std::size_t k = 1 + static_cast<std::size_t>(rng.below(m - 1));
  scratch.resize(m);
  std::iota(scratch.begin(), scratch.end(), 0u);
  out.reset(m);
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(scratch[i], scratch[j]);
    out.set(scratch[i], true);
  }
}

SelectionVector sample_selection(std::uint64_t seed, std::uint64_t index, std::size_t m) {
  CounterRng rng(seed, index);
  std::vector<std::uint32_t> scratch;
  SelectionVector s;
  StratifiedUniform::draw(rng, m, scratch, s);
  return s;
}

}  // namespace mupax
