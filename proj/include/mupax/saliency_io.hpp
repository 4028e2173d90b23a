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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupax/attribution.hpp"

namespace mupax {

// MPXS layout, little-endian:
//   "MPXS" | u8 version (=1) | MPXT body of chi | MPXT body of se
//   | u64 n | f64 W | f64 p_hat
// chi and se are stored as 32-bit reals.

inline constexpr std::uint8_t kSaliencyFormatVersion = 1;

struct SaliencyFile {
  InputTensor chi;
  InputTensor se;
  std::uint64_t n = 0;
  double w = 0.0;
  double p_hat = 0.0;
};

std::vector<std::uint8_t> encode_saliency(const SaliencyMap& map);
SaliencyFile decode_saliency(std::span<const std::uint8_t> bytes);

void save_saliency(const std::string& path, const SaliencyMap& map);
SaliencyFile load_saliency(const std::string& path);

/// Narrows a double tensor to the 32-bit exchange type (values must be >= 0).
InputTensor to_float_tensor(const RealTensor& t);

/// JSON number, or the strings "inf"/"nan" for values JSON cannot carry.
nlohmann::json json_real(double v);
double real_from_json(const nlohmann::json& j);

nlohmann::json decomposition_json(const Decomposition& d, const ChunkGrid& grid);

}  // namespace mupax
