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

#include "mupax/saliency_io.hpp"

#include <cmath>
#include <limits>

#include "mupax/tensor_io.hpp"

namespace mupax {

InputTensor to_float_tensor(const RealTensor& t) { return t.cast<float>(); }

std::vector<std::uint8_t> encode_saliency(const SaliencyMap& map) {
  ByteWriter out;
  out.raw("MPXS");
  out.u8(kSaliencyFormatVersion);
  write_tensor_body(out, to_float_tensor(map.chi));
  write_tensor_body(out, to_float_tensor(map.se));
  out.u64(map.n);
  out.f64(map.w_used);
  out.f64(map.p_hat);
  return out.take();
}

SaliencyFile decode_saliency(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, ErrorKind::kLengthMismatch);
  if (!in.expect("MPXS")) fail(ErrorKind::kBadMagic, "missing MPXS magic");
  const auto version = in.u8();
  if (version != kSaliencyFormatVersion) fail(ErrorKind::kBadMagic, "unsupported saliency version " + std::to_string(version));
  SaliencyFile f;
  f.chi = read_tensor_body(in, true);
  f.se = read_tensor_body(in, true);
  if (f.chi.shape() != f.se.shape()) fail(ErrorKind::kShapeMismatch, "chi and se shapes differ");
  f.n = in.u64();
  f.w = in.f64();
  f.p_hat = in.f64();
  if (in.remaining() != 0) fail(ErrorKind::kLengthMismatch, "trailing bytes after saliency record");
  return f;
}

void save_saliency(const std::string& path, const SaliencyMap& map) { write_file_bytes(path, encode_saliency(map)); }

SaliencyFile load_saliency(const std::string& path) { return decode_saliency(read_file_bytes(path)); }

nlohmann::json json_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::kInvalidConfig, "expected a number, got " + j.dump());
}

nlohmann::json decomposition_json(const Decomposition& d, const ChunkGrid& grid) {
  nlohmann::json chunks = nlohmann::json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    nlohmann::json c;
    c["chunk"] = j;
    c["retention"] = d.retention[j];
    c["goodness"] = d.goodness[j] ? nlohmann::json(*d.goodness[j]) : nlohmann::json(nullptr);
    chunks.push_back(std::move(c));
  }
  nlohmann::json out;
  out["chunk_shape"] = grid.chunk_shape();
  out["input_shape"] = grid.input_shape();
  out["chunks"] = std::move(chunks);
  out["max_identity_residual"] = d.max_identity_residual;
  return out;
}

}  // namespace mupax
