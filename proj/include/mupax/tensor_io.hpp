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

#include "mupax/bytes.hpp"
#include "mupax/tensor.hpp"

namespace mupax {

// MPXT layout, little-endian, no padding:
//   "MPXT" | u8 version (=1) | u8 rank N | N x u32 extent | prod(extents) x f32
// The part after the magic is the "body"; it is embedded verbatim in MPXS
// files and in bridge eval requests.

inline constexpr std::uint8_t kTensorFormatVersion = 1;

void write_tensor_body(ByteWriter& out, const InputTensor& tensor);

/// With `strict` set, values must be finite and nonnegative.
InputTensor read_tensor_body(ByteReader& in, bool strict);

std::vector<std::uint8_t> encode_tensor(const InputTensor& tensor);
InputTensor decode_tensor(std::span<const std::uint8_t> bytes, bool strict = true);

InputTensor load_tensor(const std::string& path, bool strict = true);
void save_tensor(const std::string& path, const InputTensor& tensor);

}  // namespace mupax
