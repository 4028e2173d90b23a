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
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "mupax/models.hpp"

namespace mupax {

struct PredictorHandle {
  std::shared_ptr<const Predictor> predictor;
  std::optional<PlantedModelSpec> planted;  // set for "planted:" specs
};

/// Builds a predictor from a spec string:
///
///   planted:<file.json>   {"chunk": [...], "relevant": [...], "noise": [...],
///                          "epsilon": e, "reference": "ref.mpxt",
///                          "spin_us": 0, "sleep_us": 0}
///   landmark:<file.json>  {"center": [...], "sigma": s}
///   echo
///   bridge:<host>:<port>
///
/// `input` supplies the shape (and the planted reference when the file has
/// none); `chunk` is the planted grid when the file has none. `pool` sizes
/// the bridge connection pool.
PredictorHandle make_predictor(const std::string& spec, const InputTensor& input, const Shape& chunk,
                               std::size_t pool = 1);

PlantedModelSpec planted_spec_from_json(const nlohmann::json& j, const InputTensor& input, const Shape& chunk,
                                        const std::string& base_dir = ".");
nlohmann::json planted_spec_to_json(const PlantedModelSpec& spec);

}  // namespace mupax
