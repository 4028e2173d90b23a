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

#include "mupax/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "mupax/rng.hpp"

namespace mupax {

namespace {

// Uniform random k-subset of [0, n), ascending.
std::vector<std::size_t> pick(CounterRng& rng, std::size_t n, std::size_t k, const std::vector<std::size_t>& exclude) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(exclude.begin(), exclude.end(), i) == exclude.end()) pool.push_back(i);
  }
  if (k > pool.size()) fail(ErrorKind::kInvalidConfig, "not enough chunks for the requested subsets");
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

float uniform(CounterRng& rng, float lo, float hi) { return lo + (hi - lo) * static_cast<float>(rng.uniform()); }

}  // namespace

PlantedModelSpec make_planted_instance(const PlantedInstanceConfig& config, std::uint64_t seed) {
  ChunkGrid grid(config.shape, config.chunk);
  CounterRng rng(seed, 0x706C616E74ULL);
  InputTensor reference = InputTensor::zeros(config.shape);
  for (auto& v : reference.data()) v = uniform(rng, config.value_lo, config.value_hi);
  PlantedModelSpec spec{grid, {}, {}, config.epsilon, std::move(reference)};
  spec.relevant = pick(rng, grid.size(), config.relevant, {});
  spec.noise = pick(rng, grid.size(), config.noise, spec.relevant);
  spec.validate();
  return spec;
}

TwoClassTask make_two_class_task(const TwoClassTaskConfig& config, std::uint64_t seed) {
  ChunkGrid grid(config.shape, config.chunk);
  if (grid.size() < config.relevant + 2) fail(ErrorKind::kInvalidConfig, "grid too small for the task");
  CounterRng rng(seed, 0x7461736BULL);

  TwoClassTask task{grid, {}, 0, 0, nullptr, {}};
  task.relevant = pick(rng, grid.size(), config.relevant, {});
  const auto distractors = pick(rng, grid.size(), 2, task.relevant);
  task.distractor_pos = distractors[0];
  task.distractor_neg = distractors[1];

  std::vector<double> weights(grid.size(), 0.0);
  for (std::size_t j : task.relevant) weights[j] = config.signal_gain / static_cast<double>(task.relevant.size());
  weights[task.distractor_pos] = config.distractor_gain;
  weights[task.distractor_neg] = -config.distractor_gain;
  task.classifier = std::make_shared<const ChunkEnergyClassifier>(grid, weights, -config.signal_gain * config.threshold);

  for (std::size_t i = 0; i < config.instances; ++i) {
    const std::size_t label = i % 2;
    std::vector<float> amplitude(grid.size(), 1.0f);
    const float signal = label == 1 ? uniform(rng, 0.75f, 1.0f) : uniform(rng, 0.25f, 0.55f);
    for (std::size_t j : task.relevant) amplitude[j] = signal;
    amplitude[task.distractor_pos] = uniform(rng, 0.0f, 1.0f);
    amplitude[task.distractor_neg] = uniform(rng, 0.0f, 1.0f);
    InputTensor x = InputTensor::zeros(config.shape);
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = amplitude[grid.chunk_of_flat(c)] * uniform(rng, 0.0f, 1.0f);
    task.data.push_back({std::move(x), label});
  }
  return task;
}

}  // namespace mupax
