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

#include "mupax/exact_sum.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "mupax/error.hpp"

namespace mupax {

void ExactSum::add_at(int bit, std::uint64_t mantissa) {
  int limb = bit / 64;
  const int off = bit % 64;
  std::uint64_t lo = mantissa << off;
  std::uint64_t hi = off ? mantissa >> (64 - off) : 0;
  std::uint64_t carry = 0;
  auto add_limb = [&](int i, std::uint64_t v) {
    const std::uint64_t before = limbs_[i];
    limbs_[i] = before + v + carry;
    carry = (limbs_[i] < before || (carry && limbs_[i] == before)) ? 1 : 0;
  };
  add_limb(limb, lo);
  if (++limb < kLimbs) add_limb(limb, hi);
  while (carry && ++limb < kLimbs) add_limb(limb, 0);
  if (carry) fail(ErrorKind::kInvalidLoss, "exact accumulator overflow");
}

void ExactSum::add(double v) {
  if (!(v >= 0.0) || !std::isfinite(v) || v >= 0x1.0p64) {
    fail(ErrorKind::kInvalidLoss, "exact accumulator takes finite values in [0, 2^64), got " + std::to_string(v));
  }
  if (v == 0.0) return;
  const auto bits = std::bit_cast<std::uint64_t>(v);
  const int exponent = static_cast<int>((bits >> 52) & 0x7FF);
  std::uint64_t mantissa = bits & ((std::uint64_t{1} << 52) - 1);
  int lsb = 0;
  if (exponent != 0) {
    mantissa |= std::uint64_t{1} << 52;
    lsb = exponent - 1;
  }
  add_at(lsb, mantissa);
}

void ExactSum::merge(const ExactSum& other) {
  std::uint64_t carry = 0;
  for (int i = 0; i < kLimbs; ++i) {
    const std::uint64_t a = limbs_[i];
    const std::uint64_t s = a + other.limbs_[i];
    const std::uint64_t c1 = s < a ? 1 : 0;
    limbs_[i] = s + carry;
    const std::uint64_t c2 = limbs_[i] < s ? 1 : 0;
    carry = c1 | c2;
  }
  if (carry) fail(ErrorKind::kInvalidLoss, "exact accumulator overflow");
}

bool ExactSum::is_zero() const {
  for (auto l : limbs_)
    if (l) return false;
  return true;
}

double ExactSum::value() const {
  int top_limb = kLimbs - 1;
  while (top_limb >= 0 && limbs_[top_limb] == 0) --top_limb;
  if (top_limb < 0) return 0.0;
  const int top_bit = top_limb * 64 + (63 - std::countl_zero(limbs_[top_limb]));

  // Gather the 64 bits ending at top_bit into `window`, remember whether
  // anything below them is set.
  std::uint64_t window = 0;
  bool sticky = false;
  const int shift = top_bit - 63;
  if (shift <= 0) {
    window = limbs_[0] << (-shift);
  } else {
    const int limb = shift / 64;
    const int off = shift % 64;
    window = limbs_[limb] >> off;
    if (off && limb + 1 < kLimbs) window |= limbs_[limb + 1] << (64 - off);
    if (off && (limbs_[limb] & ((std::uint64_t{1} << off) - 1))) sticky = true;
    for (int i = 0; i < limb && !sticky; ++i) sticky = limbs_[i] != 0;
  }

  // Round the 64-bit window to 53 bits, nearest-even.
  std::uint64_t mantissa = window >> 11;
  const std::uint64_t rest = window & 0x7FF;
  constexpr std::uint64_t kHalf = 0x400;
  int scale = shift + 11 - 1074;
  if (rest > kHalf || (rest == kHalf && (sticky || (mantissa & 1)))) {
    ++mantissa;
    if (mantissa == (std::uint64_t{1} << 53)) {
      mantissa >>= 1;
      ++scale;
    }
  }
  return std::ldexp(static_cast<double>(mantissa), scale);
}

}  // namespace mupax
