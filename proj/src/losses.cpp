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

#include "mupax/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mupax/predictor.hpp"

namespace mupax {

double evaluate_one(const Predictor& predictor, const InputTensor& x) {
  auto losses = predictor.evaluate(std::span<const InputTensor>(&x, 1));
  check_losses(losses, 1);
  return losses.front();
}

void check_losses(std::span<const double> losses, std::size_t expected) {
  if (losses.size() != expected) {
    fail(ErrorKind::kInvalidLoss,
         "predictor returned " + std::to_string(losses.size()) + " losses for " + std::to_string(expected) + " inputs");
  }
  for (double mu : losses) {
    if (!std::isfinite(mu) || mu < 0.0) fail(ErrorKind::kInvalidLoss, "loss must be finite and >= 0, got " + std::to_string(mu));
  }
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "cross_entropy") return LossKind::kCrossEntropy;
  if (name == "zero_one") return LossKind::kZeroOne;
  if (name == "heatmap_mse") return LossKind::kHeatmapMse;
  fail(ErrorKind::kInvalidConfig, "unknown loss kind '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kMse: return "mse";
    case LossKind::kCrossEntropy: return "cross_entropy";
    case LossKind::kZeroOne: return "zero_one";
    case LossKind::kHeatmapMse: return "heatmap_mse";
  }
  return "unknown";
}

double mse(std::span<const double> prediction, std::span<const double> target) {
  if (prediction.empty()) fail(ErrorKind::kEmptyInput, "mse of empty input");
  if (prediction.size() != target.size()) fail(ErrorKind::kShapeMismatch, "mse operands differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = prediction[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(prediction.size());
}

double cross_entropy(std::span<const double> probabilities, std::size_t true_class) {
  if (probabilities.empty()) fail(ErrorKind::kEmptyInput, "cross entropy of empty distribution");
  if (true_class >= probabilities.size()) fail(ErrorKind::kOutOfBounds, "true class outside distribution");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) fail(ErrorKind::kNotAProbability, "negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    fail(ErrorKind::kNotAProbability, "probabilities sum to " + std::to_string(total));
  }
  return -std::log(std::max(probabilities[true_class], kProbabilityClamp));
}

double zero_one(std::span<const double> scores, std::size_t target) {
  if (scores.empty()) fail(ErrorKind::kEmptyInput, "zero-one loss of empty scores");
  const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  return best == target ? 0.0 : 1.0;
}

RealTensor gaussian_heatmap(const Shape& shape, std::span<const double> center, double sigma) {
  if (center.size() != shape.size()) fail(ErrorKind::kRankMismatch, "landmark rank differs from heatmap rank");
  if (!(sigma > 0.0)) fail(ErrorKind::kInvalidConfig, "sigma must be positive");
  RealTensor out = RealTensor::zeros(shape);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const auto idx = unravel(flat, shape);
    double r2 = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double d = static_cast<double>(idx[i]) - center[i];
      r2 += d * d;
    }
    out[flat] = std::exp(-r2 * inv);
  }
  return out;
}

double heatmap_mse(const RealTensor& predicted, std::span<const double> center, double sigma) {
  const RealTensor target = gaussian_heatmap(predicted.shape(), center, sigma);
  return mse(predicted.data(), target.data());
}

}  // namespace mupax
