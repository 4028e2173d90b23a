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

#include <array>
#include <cstdint>

namespace mupax {

/// Exact sum of nonnegative doubles below 2^64.
///
/// Values are added into a 1216-bit fixed-point integer whose least
/// significant bit weighs 2^-1074 (the smallest subnormal), so addition is
/// exact, associative and commutative. value() rounds to nearest-even once.
/// Accumulators filled from the same multiset of addends compare equal no
/// matter how the additions were split or ordered.
class ExactSum {
 public:
  void add(double v);
  void merge(const ExactSum& other);
  double value() const;
  bool is_zero() const;

  friend bool operator==(const ExactSum&, const ExactSum&) = default;

 private:
  static constexpr int kLimbs = 19;
  void add_at(int bit, std::uint64_t mantissa);

  std::array<std::uint64_t, kLimbs> limbs_{};
};

}  // namespace mupax
