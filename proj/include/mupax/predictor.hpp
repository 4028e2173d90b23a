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
#include <string>
#include <vector>

#include "mupax/tensor.hpp"

namespace mupax {

/// A frozen model bundled with its target and loss: mu(X_arg) = L(f(X_arg), y).
///
/// Implementations must be deterministic (same bytes in, same loss out) and
/// must return finite, nonnegative losses. The engine validates both.
class Predictor {
 public:
  virtual ~Predictor() = default;

  /// One loss per batch element, in batch order.
  virtual std::vector<double> evaluate(std::span<const InputTensor> batch) const = 0;

  virtual const Shape& input_shape() const = 0;
  virtual std::string description() const = 0;

  /// Upper bound on concurrent evaluate() calls; 0 means unbounded.
  virtual std::size_t max_concurrency() const { return 0; }
};

double evaluate_one(const Predictor& predictor, const InputTensor& x);

/// Throws InvalidLoss unless there are `expected` finite, nonnegative values.
void check_losses(std::span<const double> losses, std::size_t expected);

}  // namespace mupax
