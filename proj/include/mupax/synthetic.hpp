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
#include <cstdint>
#include <memory>
#include <vector>

#include "mupax/models.hpp"

namespace mupax {

// Desk-scale instances whose relevant chunks are known by construction.

struct PlantedInstanceConfig {
  Shape shape{8};
  Shape chunk{1};
  std::size_t relevant = 2;
  std::size_t noise = 0;
  double epsilon = 0.0;
  float value_lo = 0.1f;
  float value_hi = 1.0f;
};

/// Reference values uniform in [value_lo, value_hi); S* and the noise chunks
/// are disjoint uniform random subsets.
PlantedModelSpec make_planted_instance(const PlantedInstanceConfig& config, std::uint64_t seed);

struct LabeledInstance {
  InputTensor x;
  std::size_t label = 0;
};

/// Two-class task: the class is decided by the energy in the relevant chunks,
/// and the frozen classifier is also swayed by the energy difference of two
/// distractor chunks that carry no class information.
struct TwoClassTaskConfig {
  Shape shape{16, 16};
  Shape chunk{4, 4};
  std::size_t relevant = 2;
  std::size_t instances = 40;
  double signal_gain = 20.0;       // weight on mean relevant energy
  double threshold = 0.14;         // class boundary on mean relevant energy
  double distractor_gain = 20.0;   // weight on (E_d+ - E_d-)
};

struct TwoClassTask {
  ChunkGrid grid;
  std::vector<std::size_t> relevant;
  std::size_t distractor_pos = 0;
  std::size_t distractor_neg = 0;
  std::shared_ptr<const ChunkEnergyClassifier> classifier;
  std::vector<LabeledInstance> data;
};

TwoClassTask make_two_class_task(const TwoClassTaskConfig& config, std::uint64_t seed);

}  // namespace mupax
