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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mupax/error.hpp"

namespace mupax {

using Shape = std::vector<std::size_t>;

/// Product of the extents. Throws ShapeOverflow when it does not fit in
/// size_t or when the shape is empty or has a zero extent.
std::size_t shape_volume(const Shape& shape);

/// Dense N-d array stored flat in row-major order.
///
/// The values live in an Eigen column array so whole-tensor arithmetic can be
/// written as array expressions; the shape is metadata only.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using value_type = Scalar;

  Tensor() = default;

  Tensor(Shape shape, Array values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != shape_volume(shape_)) {
      fail(ErrorKind::kLengthMismatch, "value count does not match shape");
    }
  }

  static Tensor zeros(Shape shape) {
    const auto n = static_cast<Eigen::Index>(shape_volume(shape));
    return Tensor(std::move(shape), Array::Zero(n));
  }

  static Tensor from(Shape shape, std::span<const Scalar> values) {
    Array a(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) a[static_cast<Eigen::Index>(i)] = values[i];
    return Tensor(std::move(shape), std::move(a));
  }

  static Tensor from(Shape shape, std::initializer_list<Scalar> values) {
    return from(std::move(shape), std::span<const Scalar>(values.begin(), values.size()));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  const Array& values() const noexcept { return values_; }
  Array& values() noexcept { return values_; }

  Scalar operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  Scalar& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  std::span<const Scalar> data() const noexcept { return {values_.data(), size()}; }
  std::span<Scalar> data() noexcept { return {values_.data(), size()}; }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, values_.template cast<Other>());
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && (a.values_ == b.values_).all();
  }

 private:
  Shape shape_;
  Array values_;
};

using InputTensor = Tensor<float>;
using RealTensor = Tensor<double>;

enum class NonnegMode { kStrict, kShiftMin };

/// Finite check plus the nonnegativity contract. Strict mode rejects any
/// negative value; shift-min subtracts min(X) when it is negative.
InputTensor validate_or_shift(const InputTensor& x, NonnegMode mode);

/// Throws NonFinite or NegativeValue unless every value is finite and >= 0.
void require_nonnegative(const InputTensor& x);

/// Row-major multi-index of a flat offset.
std::vector<std::size_t> unravel(std::size_t flat, const Shape& shape);
std::size_t ravel(std::span<const std::size_t> index, const Shape& shape);

}  // namespace mupax
