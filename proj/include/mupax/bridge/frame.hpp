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

#include "mupax/tensor.hpp"

namespace mupax::bridge {

// Wire format, little-endian. Every frame is
//
//   u32 length | "MPX1" | u8 type | u64 request_id | payload
//
// where `length` counts every byte after itself. Payloads:
//
//   EvalRequest  (1): u16 batch_size | batch_size x MPXT body
//   EvalResponse (2): u16 count | count x (u16 item_index | f64 loss)
//   Error        (3): u32 text_length | UTF-8 text
//   Hello        (4): u8 protocol_version
//   HelloAck     (5): u8 protocol_version | u32 max_batch
//
// An MPXT body is the tensor file without its magic:
// u8 version | u8 rank | rank x u32 extent | f32 values.

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 7341;
inline constexpr std::uint32_t kMaxFrameLength = 1u << 30;
inline constexpr std::size_t kFrameHeaderLength = 4 + 4 + 1 + 8;

enum class FrameType : std::uint8_t {
  kEvalRequest = 1,
  kEvalResponse = 2,
  kError = 3,
  kHello = 4,
  kHelloAck = 5,
};

struct Frame {
  FrameType type = FrameType::kHello;
  std::uint64_t request_id = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Decodes exactly one complete frame (length prefix included). Any
/// structural problem is a ProtocolError.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Length announced by a 4-byte prefix; ProtocolError if it is implausible.
std::uint32_t frame_length(std::span<const std::uint8_t, 4> prefix);

std::vector<std::uint8_t> encode_eval_request(std::uint64_t id, std::span<const InputTensor> batch);
std::vector<InputTensor> decode_eval_request(const Frame& frame);

struct EvalItem {
  std::uint16_t index = 0;
  double loss = 0.0;
};

std::vector<std::uint8_t> encode_eval_response(std::uint64_t id, std::span<const EvalItem> items);
std::vector<std::uint8_t> encode_eval_response(std::uint64_t id, std::span<const double> losses);

/// Losses in item-index order; every index in [0, expected) exactly once.
std::vector<double> decode_eval_response(const Frame& frame, std::size_t expected);

std::vector<std::uint8_t> encode_error(std::uint64_t id, const std::string& text);
std::string decode_error(const Frame& frame);

std::vector<std::uint8_t> encode_hello(std::uint64_t id);
std::vector<std::uint8_t> encode_hello_ack(std::uint64_t id, std::uint32_t max_batch);
std::uint32_t decode_hello_ack(const Frame& frame);

}  // namespace mupax::bridge
