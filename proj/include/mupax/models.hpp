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

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mupax/chunking.hpp"
#include "mupax/losses.hpp"
#include "mupax/predictor.hpp"

namespace mupax {

/// Ground-truth model: only the `relevant` chunks of `reference` matter.
///
///   mu = sum_{a in S*} (X_arg(a) - ref(a))^2 / sum_{a in S*} ref(a)^2
///        + epsilon * (noise chunks retained) / |noise|
///
/// A noise chunk counts as retained when any of its coordinates is nonzero.
struct PlantedModelSpec {
  ChunkGrid grid;
  std::vector<std::size_t> relevant;
  std::vector<std::size_t> noise;
  double epsilon = 0.0;
  InputTensor reference;

  /// Throws InvalidConfig or DegenerateReference when the invariants fail.
  void validate() const;
};

double planted_loss(const PlantedModelSpec& spec, const InputTensor& x_arg);

/// Optional artificial cost per evaluated tensor. `spin` burns CPU, `sleep`
/// waits (a stand-in for a remote model's latency).
struct EvalCost {
  std::chrono::microseconds spin{0};
  std::chrono::microseconds sleep{0};

  void charge(std::size_t evaluations) const;
};

class PlantedPredictor final : public Predictor {
 public:
  explicit PlantedPredictor(PlantedModelSpec spec, EvalCost cost = {});

  std::vector<double> evaluate(std::span<const InputTensor> batch) const override;
  const Shape& input_shape() const override { return spec_.reference.shape(); }
  std::string description() const override;

  const PlantedModelSpec& spec() const noexcept { return spec_; }

 private:
  PlantedModelSpec spec_;
  EvalCost cost_;
  double denominator_ = 0.0;
};

/// mu = sum of the tensor's values, accumulated in double in flat order.
/// Mirrors the reference adapter's echo mode.
class EchoPredictor final : public Predictor {
 public:
  explicit EchoPredictor(Shape shape) : shape_(std::move(shape)) {}

  std::vector<double> evaluate(std::span<const InputTensor> batch) const override;
  const Shape& input_shape() const override { return shape_; }
  std::string description() const override { return "echo(sum)"; }

 private:
  Shape shape_;
};

double echo_loss(const InputTensor& x);

/// Frozen classifier returning a probability vector.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<double> probabilities(const InputTensor& x) const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual const Shape& input_shape() const = 0;

  std::size_t predict(const InputTensor& x) const;
};

/// Two-class logistic model over per-chunk mean energies E_j = mean(X^2):
/// P(class 1) = sigmoid(bias + sum_j weight_j * E_j).
class ChunkEnergyClassifier final : public Classifier {
 public:
  ChunkEnergyClassifier(ChunkGrid grid, std::vector<double> weights, double bias);

  std::vector<double> probabilities(const InputTensor& x) const override;
  std::size_t num_classes() const override { return 2; }
  const Shape& input_shape() const override { return grid_.input_shape(); }

  double logit(const InputTensor& x) const;

 private:
  ChunkGrid grid_;
  std::vector<double> weights_;
  double bias_;
};

/// mu = L(classifier(X_arg), label) for L in {cross_entropy, zero_one}.
class ClassifierPredictor final : public Predictor {
 public:
  ClassifierPredictor(std::shared_ptr<const Classifier> classifier, std::size_t label,
                      LossKind loss = LossKind::kCrossEntropy);

  std::vector<double> evaluate(std::span<const InputTensor> batch) const override;
  const Shape& input_shape() const override { return classifier_->input_shape(); }
  std::string description() const override;

 private:
  std::shared_ptr<const Classifier> classifier_;
  std::size_t label_;
  LossKind loss_;
};

/// Synthetic landmark task. The "network" predicts a heatmap by scaling the
/// input to peak 1 (all-zero input predicts all zeros); mu is the heatmap MSE
/// against a Gaussian bump at `center`.
class LandmarkPredictor final : public Predictor {
 public:
  LandmarkPredictor(Shape shape, std::vector<double> center, double sigma);

  std::vector<double> evaluate(std::span<const InputTensor> batch) const override;
  const Shape& input_shape() const override { return shape_; }
  std::string description() const override;

 private:
  Shape shape_;
  std::vector<double> center_;
  double sigma_;
  RealTensor target_;
};

}  // namespace mupax
