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

#include "mupax/tensor_io.hpp"

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

namespace mupax {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorKind::kNotFound, "no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path + ": " + std::strerror(errno));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path + " for writing: " + std::strerror(errno));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "short write to " + path);
}

void write_tensor_body(ByteWriter& out, const InputTensor& tensor) {
  if (tensor.rank() == 0 || tensor.rank() > 255) fail(ErrorKind::kShapeOverflow, "rank must be in [1, 255]");
  out.u8(kTensorFormatVersion);
  out.u8(static_cast<std::uint8_t>(tensor.rank()));
  for (std::size_t d : tensor.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) fail(ErrorKind::kShapeOverflow, "extent exceeds u32");
    out.u32(static_cast<std::uint32_t>(d));
  }
  for (float v : tensor.data()) out.f32(v);
}

InputTensor read_tensor_body(ByteReader& in, bool strict) {
  const std::uint8_t version = in.u8();
  if (version != kTensorFormatVersion) {
    fail(ErrorKind::kBadMagic, "unsupported tensor format version " + std::to_string(version));
  }
  const std::uint8_t rank = in.u8();
  if (rank == 0) fail(ErrorKind::kShapeOverflow, "rank 0 tensor");
  Shape shape(rank);
  for (auto& d : shape) d = in.u32();
  const std::size_t count = shape_volume(shape);
  if (count > std::numeric_limits<std::size_t>::max() / 4) fail(ErrorKind::kShapeOverflow, "payload size overflows");
  if (in.remaining() < count * 4) {
    fail(ErrorKind::kLengthMismatch, "payload holds " + std::to_string(in.remaining() / 4) + " values, shape needs " +
                                         std::to_string(count));
  }
  InputTensor::Array values(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) values[static_cast<Eigen::Index>(i)] = in.f32();
  InputTensor t(std::move(shape), std::move(values));
  if (strict) require_nonnegative(t);
  return t;
}

std::vector<std::uint8_t> encode_tensor(const InputTensor& tensor) {
  ByteWriter out;
  out.raw("MPXT");
  write_tensor_body(out, tensor);
  return out.take();
}

InputTensor decode_tensor(std::span<const std::uint8_t> bytes, bool strict) {
  ByteReader in(bytes, ErrorKind::kLengthMismatch);
  if (!in.expect("MPXT")) fail(ErrorKind::kBadMagic, "missing MPXT magic");
  InputTensor t = read_tensor_body(in, strict);
  if (in.remaining() != 0) {
    fail(ErrorKind::kLengthMismatch, std::to_string(in.remaining()) + " trailing bytes after payload");
  }
  return t;
}

InputTensor load_tensor(const std::string& path, bool strict) { return decode_tensor(read_file_bytes(path), strict); }

void save_tensor(const std::string& path, const InputTensor& tensor) { write_file_bytes(path, encode_tensor(tensor)); }

}  // namespace mupax
