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

#include "mupax/bridge/frame.hpp"

#include <limits>

#include "mupax/bytes.hpp"
#include "mupax/tensor_io.hpp"

namespace mupax::bridge {

namespace {

[[noreturn]] void protocol_error(const std::string& what) { fail(ErrorKind::kProtocolError, what); }

void expect_type(const Frame& frame, FrameType type) {
  if (frame.type != type) {
    protocol_error("expected frame type " + std::to_string(static_cast<int>(type)) + ", got " +
                   std::to_string(static_cast<int>(frame.type)));
  }
}

// Payload decoders run through a reader whose short reads are protocol errors.
ByteReader payload_reader(const Frame& frame) { return ByteReader(frame.payload, ErrorKind::kProtocolError); }

void expect_consumed(const ByteReader& in) {
  if (in.remaining() != 0) protocol_error(std::to_string(in.remaining()) + " trailing payload bytes");
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  ByteWriter out;
  out.u32(0);
  out.raw("MPX1");
  out.u8(static_cast<std::uint8_t>(frame.type));
  out.u64(frame.request_id);
  out.raw(frame.payload);
  const std::size_t length = out.size() - 4;
  if (length > kMaxFrameLength) fail(ErrorKind::kProtocolError, "frame exceeds maximum length");
  out.patch_u32(0, static_cast<std::uint32_t>(length));
  return out.take();
}

std::uint32_t frame_length(std::span<const std::uint8_t, 4> prefix) {
  ByteReader in(prefix, ErrorKind::kProtocolError);
  const std::uint32_t length = in.u32();
  if (length < kFrameHeaderLength - 4) protocol_error("frame length " + std::to_string(length) + " below header size");
  if (length > kMaxFrameLength) protocol_error("frame length " + std::to_string(length) + " exceeds limit");
  return length;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderLength) protocol_error("frame shorter than header");
  const std::uint32_t length = frame_length(bytes.first<4>());
  if (bytes.size() - 4 != length) {
    protocol_error("length prefix says " + std::to_string(length) + " bytes, frame has " +
                   std::to_string(bytes.size() - 4));
  }
  ByteReader in(bytes.subspan(4), ErrorKind::kProtocolError);
  if (!in.expect("MPX1")) protocol_error("bad frame magic");
  const std::uint8_t type = in.u8();
  if (type < 1 || type > 5) protocol_error("unknown frame type " + std::to_string(type));
  Frame f;
  f.type = static_cast<FrameType>(type);
  f.request_id = in.u64();
  const auto rest = in.raw(in.remaining());
  f.payload.assign(rest.begin(), rest.end());
  return f;
}

std::vector<std::uint8_t> encode_eval_request(std::uint64_t id, std::span<const InputTensor> batch) {
  if (batch.empty()) fail(ErrorKind::kEmptyBatch, "eval request needs at least one tensor");
  if (batch.size() > std::numeric_limits<std::uint16_t>::max()) fail(ErrorKind::kProtocolError, "batch exceeds u16");
  for (const auto& t : batch) {
    if (t.shape() != batch.front().shape()) fail(ErrorKind::kMixedShapes, "batch tensors differ in shape");
  }
  ByteWriter payload;
  payload.u16(static_cast<std::uint16_t>(batch.size()));
  for (const auto& t : batch) write_tensor_body(payload, t);
  return encode_frame({FrameType::kEvalRequest, id, payload.take()});
}

std::vector<InputTensor> decode_eval_request(const Frame& frame) {
  expect_type(frame, FrameType::kEvalRequest);
  auto in = payload_reader(frame);
  const std::uint16_t count = in.u16();
  if (count == 0) protocol_error("empty eval request");
  std::vector<InputTensor> batch;
  batch.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    try {
      batch.push_back(read_tensor_body(in, false));
    } catch (const Error& e) {
      protocol_error(std::string("bad tensor body: ") + e.what());
    }
    if (batch.back().shape() != batch.front().shape()) protocol_error("eval request mixes tensor shapes");
  }
  expect_consumed(in);
  return batch;
}

std::vector<std::uint8_t> encode_eval_response(std::uint64_t id, std::span<const EvalItem> items) {
  ByteWriter payload;
  payload.u16(static_cast<std::uint16_t>(items.size()));
  for (const auto& it : items) {
    payload.u16(it.index);
    payload.f64(it.loss);
  }
  return encode_frame({FrameType::kEvalResponse, id, payload.take()});
}

std::vector<std::uint8_t> encode_eval_response(std::uint64_t id, std::span<const double> losses) {
  std::vector<EvalItem> items;
  items.reserve(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) items.push_back({static_cast<std::uint16_t>(i), losses[i]});
  return encode_eval_response(id, items);
}

std::vector<double> decode_eval_response(const Frame& frame, std::size_t expected) {
  expect_type(frame, FrameType::kEvalResponse);
  auto in = payload_reader(frame);
  const std::uint16_t count = in.u16();
  if (count != expected) {
    protocol_error("response carries " + std::to_string(count) + " losses, expected " + std::to_string(expected));
  }
  std::vector<double> losses(count);
  std::vector<bool> seen(count, false);
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::uint16_t index = in.u16();
    const double loss = in.f64();
    if (index >= count || seen[index]) protocol_error("response item index " + std::to_string(index) + " invalid");
    seen[index] = true;
    losses[index] = loss;
  }
  expect_consumed(in);
  return losses;
}

std::vector<std::uint8_t> encode_error(std::uint64_t id, const std::string& text) {
  ByteWriter payload;
  payload.u32(static_cast<std::uint32_t>(text.size()));
  payload.raw(text);
  return encode_frame({FrameType::kError, id, payload.take()});
}

std::string decode_error(const Frame& frame) {
  expect_type(frame, FrameType::kError);
  auto in = payload_reader(frame);
  const std::uint32_t n = in.u32();
  const auto text = in.raw(n);
  expect_consumed(in);
  return std::string(text.begin(), text.end());
}

std::vector<std::uint8_t> encode_hello(std::uint64_t id) {
  return encode_frame({FrameType::kHello, id, {kProtocolVersion}});
}

std::vector<std::uint8_t> encode_hello_ack(std::uint64_t id, std::uint32_t max_batch) {
  ByteWriter payload;
  payload.u8(kProtocolVersion);
  payload.u32(max_batch);
  return encode_frame({FrameType::kHelloAck, id, payload.take()});
}

std::uint32_t decode_hello_ack(const Frame& frame) {
  expect_type(frame, FrameType::kHelloAck);
  auto in = payload_reader(frame);
  const std::uint8_t version = in.u8();
  if (version != kProtocolVersion) protocol_error("server speaks protocol version " + std::to_string(version));
  const std::uint32_t max_batch = in.u32();
  expect_consumed(in);
  if (max_batch == 0) protocol_error("server advertised max batch 0");
  return max_batch;
}

}  // namespace mupax::bridge
