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
#include <string_view>

#include "mupax/tensor.hpp"

namespace mupax {

enum class LossKind { kMse, kCrossEntropy, kZeroOne, kHeatmapMse };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

inline constexpr double kProbabilityClamp = 1e-12;
inline constexpr double kProbabilityTolerance = 1e-6;

double mse(std::span<const double> prediction, std::span<const double> target);

/// -ln p[true_class], with p clamped below at 1e-12. `probabilities` must be a
/// distribution: entries >= 0 summing to 1 within 1e-6.
double cross_entropy(std::span<const double> probabilities, std::size_t true_class);

/// 0 when argmax(scores) == target (first maximum wins), else 1.
double zero_one(std::span<const double> scores, std::size_t target);

/// Gaussian bump exp(-|a - center|^2 / (2 sigma^2)) with peak 1.
RealTensor gaussian_heatmap(const Shape& shape, std::span<const double> center, double sigma);

/// MSE between a predicted heatmap and the Gaussian target heatmap.
double heatmap_mse(const RealTensor& predicted, std::span<const double> center, double sigma);

}  // namespace mupax
