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

#include "mupax/tensor.hpp"

#include <limits>
#include <string>

namespace mupax {

std::size_t shape_volume(const Shape& shape) {
  if (shape.empty()) fail(ErrorKind::kShapeOverflow, "rank must be at least 1");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) fail(ErrorKind::kShapeOverflow, "zero extent in shape");
    if (n > std::numeric_limits<std::size_t>::max() / d) {
      fail(ErrorKind::kShapeOverflow, "shape volume overflows");
    }
    n *= d;
  }
  return n;
}

void require_nonnegative(const InputTensor& x) {
  const auto& v = x.values();
  if (!v.isFinite().all()) fail(ErrorKind::kNonFinite, "tensor contains non-finite values");
  if ((v < 0.0f).any()) fail(ErrorKind::kNegativeValue, "tensor contains negative values");
}

InputTensor validate_or_shift(const InputTensor& x, NonnegMode mode) {
  if (!x.values().isFinite().all()) fail(ErrorKind::kNonFinite, "tensor contains non-finite values");
  const float lo = x.values().minCoeff();
  if (lo >= 0.0f) return x;
  if (mode == NonnegMode::kStrict) {
    fail(ErrorKind::kNegativeValue, "minimum value " + std::to_string(lo) + " is negative");
  }
  InputTensor shifted(x.shape(), x.values() - lo);
  // x - min can still round to a tiny negative for subnormal differences.
  shifted.values() = shifted.values().max(0.0f);
  return shifted;
}

std::vector<std::size_t> unravel(std::size_t flat, const Shape& shape) {
  std::vector<std::size_t> idx(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    idx[i] = flat % shape[i];
    flat /= shape[i];
  }
  return idx;
}

std::size_t ravel(std::span<const std::size_t> index, const Shape& shape) {
  if (index.size() != shape.size()) fail(ErrorKind::kRankMismatch, "index rank differs from shape rank");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (index[i] >= shape[i]) fail(ErrorKind::kOutOfBounds, "index outside shape");
    flat = flat * shape[i] + index[i];
  }
  return flat;
}

}  // namespace mupax
