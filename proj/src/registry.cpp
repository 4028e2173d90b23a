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

#include "mupax/registry.hpp"

#include <filesystem>
#include <fstream>

#include "mupax/bridge/client.hpp"
#include "mupax/tensor_io.hpp"

namespace mupax {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kNotFound, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidConfig, path + ": " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidConfig, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

PlantedModelSpec planted_spec_from_json(const nlohmann::json& j, const InputTensor& input, const Shape& chunk,
                                        const std::string& base_dir) {
  if (!j.is_object()) fail(ErrorKind::kInvalidConfig, "planted spec must be a JSON object");
  InputTensor reference = input;
  if (j.contains("reference")) {
    std::filesystem::path p = j.at("reference").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    reference = load_tensor(p.string());
  }
  const Shape grid_chunk = field<Shape>(j, "chunk", chunk);
  PlantedModelSpec spec{ChunkGrid(reference.shape(), grid_chunk),
                        field<std::vector<std::size_t>>(j, "relevant", {}),
                        field<std::vector<std::size_t>>(j, "noise", {}), field<double>(j, "epsilon", 0.0),
                        std::move(reference)};
  spec.validate();
  return spec;
}

nlohmann::json planted_spec_to_json(const PlantedModelSpec& spec) {
  return {{"chunk", spec.grid.chunk_shape()},
          {"relevant", spec.relevant},
          {"noise", spec.noise},
          {"epsilon", spec.epsilon}};
}

PredictorHandle make_predictor(const std::string& spec, const InputTensor& input, const Shape& chunk,
                               std::size_t pool) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (kind == "echo") return {std::make_shared<EchoPredictor>(input.shape()), std::nullopt};

  if (kind == "bridge") {
    if (arg.empty()) fail(ErrorKind::kInvalidConfig, "bridge predictor needs host:port");
    return {std::make_shared<bridge::BridgePredictor>(bridge::Endpoint::parse(arg), input.shape(), pool),
            std::nullopt};
  }

  if (kind == "planted") {
    if (arg.empty()) fail(ErrorKind::kInvalidConfig, "planted predictor needs a JSON spec file");
    const auto j = read_json_file(arg);
    const auto dir = std::filesystem::path(arg).parent_path().string();
    auto planted = planted_spec_from_json(j, input, chunk, dir.empty() ? "." : dir);
    if (planted.reference.shape() != input.shape()) {
      fail(ErrorKind::kShapeMismatch, "planted reference shape differs from the input");
    }
    EvalCost cost{std::chrono::microseconds(field<long>(j, "spin_us", 0)),
                  std::chrono::microseconds(field<long>(j, "sleep_us", 0))};
    auto pred = std::make_shared<PlantedPredictor>(planted, cost);
    return {std::move(pred), std::move(planted)};
  }

  if (kind == "landmark") {
    if (arg.empty()) fail(ErrorKind::kInvalidConfig, "landmark predictor needs a JSON spec file");
    const auto j = read_json_file(arg);
    return {std::make_shared<LandmarkPredictor>(input.shape(), field<std::vector<double>>(j, "center", {}),
                                                field<double>(j, "sigma", 1.0)),
            std::nullopt};
  }

  fail(ErrorKind::kInvalidConfig, "unknown predictor spec '" + spec + "'");
}

}  // namespace mupax
