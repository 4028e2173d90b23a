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

#include "mupax/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace mupax {

namespace {

double relevant_energy(const PlantedModelSpec& spec) {
  double denom = 0.0;
  for (std::size_t j : spec.relevant) {
    for (auto c : spec.grid.coordinates(j)) {
      const double r = spec.reference[c];
      denom += r * r;
    }
  }
  return denom;
}

double planted_loss_with(const PlantedModelSpec& spec, double denominator, const InputTensor& x) {
  if (x.shape() != spec.reference.shape()) fail(ErrorKind::kShapeMismatch, "input shape differs from planted reference");
  double num = 0.0;
  for (std::size_t j : spec.relevant) {
    for (auto c : spec.grid.coordinates(j)) {
      const double d = static_cast<double>(x[c]) - static_cast<double>(spec.reference[c]);
      num += d * d;
    }
  }
  double mu = num / denominator;
  if (!spec.noise.empty()) {
    std::size_t retained = 0;
    for (std::size_t j : spec.noise) {
      const auto coords = spec.grid.coordinates(j);
      if (std::any_of(coords.begin(), coords.end(), [&](std::uint32_t c) { return x[c] != 0.0f; })) ++retained;
    }
    mu += spec.epsilon * (static_cast<double>(retained) / static_cast<double>(spec.noise.size()));
  }
  return mu;
}

}  // namespace

void PlantedModelSpec::validate() const {
  if (reference.shape() != grid.input_shape()) fail(ErrorKind::kShapeMismatch, "reference shape differs from grid");
  if (relevant.empty()) fail(ErrorKind::kInvalidConfig, "planted model needs at least one relevant chunk");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::kInvalidConfig, "epsilon must be finite and >= 0");
  std::set<std::size_t> rel(relevant.begin(), relevant.end());
  if (rel.size() != relevant.size()) fail(ErrorKind::kInvalidConfig, "duplicate relevant chunk");
  std::set<std::size_t> noi(noise.begin(), noise.end());
  if (noi.size() != noise.size()) fail(ErrorKind::kInvalidConfig, "duplicate noise chunk");
  for (std::size_t j : rel) {
    if (j >= grid.size()) fail(ErrorKind::kOutOfBounds, "relevant chunk index out of range");
    if (noi.count(j)) fail(ErrorKind::kInvalidConfig, "relevant and noise chunks overlap");
  }
  for (std::size_t j : noi) {
    if (j >= grid.size()) fail(ErrorKind::kOutOfBounds, "noise chunk index out of range");
  }
  require_nonnegative(reference);
  if (!(relevant_energy(*this) > 0.0)) fail(ErrorKind::kDegenerateReference, "relevant chunks carry no energy");
}

double planted_loss(const PlantedModelSpec& spec, const InputTensor& x_arg) {
  const double denom = relevant_energy(spec);
  if (!(denom > 0.0)) fail(ErrorKind::kDegenerateReference, "relevant chunks carry no energy");
  return planted_loss_with(spec, denom, x_arg);
}

void EvalCost::charge(std::size_t evaluations) const {
  if (sleep.count() > 0) std::this_thread::sleep_for(sleep * static_cast<long>(evaluations));
  if (spin.count() > 0) {
    const auto until = std::chrono::steady_clock::now() + spin * static_cast<long>(evaluations);
    while (std::chrono::steady_clock::now() < until) {
    }
  }
}

PlantedPredictor::PlantedPredictor(PlantedModelSpec spec, EvalCost cost) : spec_(std::move(spec)), cost_(cost) {
  spec_.validate();
  denominator_ = relevant_energy(spec_);
}

std::vector<double> PlantedPredictor::evaluate(std::span<const InputTensor> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(planted_loss_with(spec_, denominator_, x));
  cost_.charge(batch.size());
  return out;
}

std::string PlantedPredictor::description() const {
  std::ostringstream os;
  os << "planted(m=" << spec_.grid.size() << ", |S*|=" << spec_.relevant.size() << ", |noise|=" << spec_.noise.size()
     << ", eps=" << spec_.epsilon << ")";
  return os.str();
}

double echo_loss(const InputTensor& x) {
  double sum = 0.0;
  for (float v : x.data()) sum += static_cast<double>(v);
  return sum;
}

std::vector<double> EchoPredictor::evaluate(std::span<const InputTensor> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& x : batch) {
    if (x.shape() != shape_) fail(ErrorKind::kShapeMismatch, "echo predictor got an unexpected shape");
    out.push_back(echo_loss(x));
  }
  return out;
}

std::size_t Classifier::predict(const InputTensor& x) const {
  const auto p = probabilities(x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

ChunkEnergyClassifier::ChunkEnergyClassifier(ChunkGrid grid, std::vector<double> weights, double bias)
    : grid_(std::move(grid)), weights_(std::move(weights)), bias_(bias) {
  if (weights_.size() != grid_.size()) fail(ErrorKind::kInvalidConfig, "one weight per chunk required");
}

double ChunkEnergyClassifier::logit(const InputTensor& x) const {
  if (x.shape() != grid_.input_shape()) fail(ErrorKind::kShapeMismatch, "classifier got an unexpected shape");
  double z = bias_;
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    if (weights_[j] == 0.0) continue;
    const auto coords = grid_.coordinates(j);
    double e = 0.0;
    for (auto c : coords) e += static_cast<double>(x[c]) * static_cast<double>(x[c]);
    z += weights_[j] * (e / static_cast<double>(coords.size()));
  }
  return z;
}

std::vector<double> ChunkEnergyClassifier::probabilities(const InputTensor& x) const {
  const double z = logit(x);
  // Evaluate the smaller tail directly so neither entry rounds to exactly 0.
  const double p1 = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  const double p0 = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  return {p0, p1};
}

ClassifierPredictor::ClassifierPredictor(std::shared_ptr<const Classifier> classifier, std::size_t label, LossKind loss)
    : classifier_(std::move(classifier)), label_(label), loss_(loss) {
  if (!classifier_) fail(ErrorKind::kInvalidConfig, "null classifier");
  if (label_ >= classifier_->num_classes()) fail(ErrorKind::kOutOfBounds, "label outside classifier classes");
  if (loss_ != LossKind::kCrossEntropy && loss_ != LossKind::kZeroOne) {
    fail(ErrorKind::kInvalidConfig, "classifier predictors support cross_entropy and zero_one");
  }
}

std::vector<double> ClassifierPredictor::evaluate(std::span<const InputTensor> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& x : batch) {
    const auto p = classifier_->probabilities(x);
    out.push_back(loss_ == LossKind::kCrossEntropy ? cross_entropy(p, label_) : zero_one(p, label_));
  }
  return out;
}

std::string ClassifierPredictor::description() const {
  return "classifier(label=" + std::to_string(label_) + ", loss=" + std::string(to_string(loss_)) + ")";
}

LandmarkPredictor::LandmarkPredictor(Shape shape, std::vector<double> center, double sigma)
    : shape_(std::move(shape)), center_(std::move(center)), sigma_(sigma), target_(gaussian_heatmap(shape_, center_, sigma_)) {}

std::vector<double> LandmarkPredictor::evaluate(std::span<const InputTensor> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& x : batch) {
    if (x.shape() != shape_) fail(ErrorKind::kShapeMismatch, "landmark predictor got an unexpected shape");
    RealTensor heat = x.cast<double>();
    const double peak = heat.values().maxCoeff();
    if (peak > 0.0) heat.values() /= peak;
    out.push_back(mse(heat.data(), target_.data()));
  }
  return out;
}

std::string LandmarkPredictor::description() const {
  std::ostringstream os;
  os << "landmark(sigma=" << sigma_ << ")";
  return os.str();
}

}  // namespace mupax
