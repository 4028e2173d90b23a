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

#include "mupax/chunking.hpp"

#include <algorithm>
#include <limits>

namespace mupax {

ChunkGrid::ChunkGrid(Shape input_shape, Shape chunk_shape)
    : input_shape_(std::move(input_shape)), chunk_shape_(std::move(chunk_shape)) {
  if (input_shape_.size() != chunk_shape_.size()) {
    fail(ErrorKind::kRankMismatch, "chunk shape rank " + std::to_string(chunk_shape_.size()) +
                                       " differs from input rank " + std::to_string(input_shape_.size()));
  }
  const std::size_t volume = shape_volume(input_shape_);
  if (volume > std::numeric_limits<std::uint32_t>::max()) fail(ErrorKind::kShapeOverflow, "input too large to chunk");
  const std::size_t rank = input_shape_.size();
  chunk_counts_.resize(rank);
  m_ = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    if (chunk_shape_[i] == 0) fail(ErrorKind::kZeroChunkExtent, "chunk extent 0 on axis " + std::to_string(i));
    if (chunk_shape_[i] > input_shape_[i]) {
      fail(ErrorKind::kZeroChunkExtent, "chunk extent exceeds input extent on axis " + std::to_string(i));
    }
    chunk_counts_[i] = (input_shape_[i] + chunk_shape_[i] - 1) / chunk_shape_[i];
    m_ *= chunk_counts_[i];
  }

  auto tables = std::make_shared<Tables>();
  tables->owner.resize(volume);
  std::vector<std::size_t> coord(rank, 0);
  std::vector<std::size_t> counts(m_, 0);
  for (std::size_t flat = 0; flat < volume; ++flat) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < rank; ++i) j = j * chunk_counts_[i] + coord[i] / chunk_shape_[i];
    tables->owner[flat] = static_cast<std::uint32_t>(j);
    ++counts[j];
    for (std::size_t i = rank; i-- > 0;) {
      if (++coord[i] < input_shape_[i]) break;
      coord[i] = 0;
    }
  }
  tables->offsets.assign(m_ + 1, 0);
  for (std::size_t j = 0; j < m_; ++j) tables->offsets[j + 1] = tables->offsets[j] + counts[j];
  tables->members.resize(volume);
  std::vector<std::size_t> cursor(tables->offsets.begin(), tables->offsets.end() - 1);
  for (std::size_t flat = 0; flat < volume; ++flat) {
    tables->members[cursor[tables->owner[flat]]++] = static_cast<std::uint32_t>(flat);
  }
  tables_ = std::move(tables);
}

std::size_t ChunkGrid::chunk_of(std::span<const std::size_t> coord) const {
  if (coord.size() != input_shape_.size()) fail(ErrorKind::kRankMismatch, "coordinate rank mismatch");
  std::size_t j = 0;
  for (std::size_t i = 0; i < coord.size(); ++i) {
    if (coord[i] >= input_shape_[i]) fail(ErrorKind::kOutOfBounds, "coordinate outside input shape");
    j = j * chunk_counts_[i] + coord[i] / chunk_shape_[i];
  }
  return j;
}

void ChunkGrid::chunk_box(std::size_t j, std::vector<std::size_t>& lo, std::vector<std::size_t>& hi) const {
  if (j >= m_) fail(ErrorKind::kOutOfBounds, "chunk index out of range");
  const std::size_t rank = input_shape_.size();
  lo.assign(rank, 0);
  hi.assign(rank, 0);
  for (std::size_t i = rank; i-- > 0;) {
    const std::size_t k = j % chunk_counts_[i];
    j /= chunk_counts_[i];
    lo[i] = k * chunk_shape_[i];
    hi[i] = std::min(lo[i] + chunk_shape_[i], input_shape_[i]);
  }
}

std::span<const std::uint32_t> ChunkGrid::coordinates(std::size_t j) const {
  if (j >= m_) fail(ErrorKind::kOutOfBounds, "chunk index out of range");
  const auto& t = *tables_;
  return std::span<const std::uint32_t>(t.members).subspan(t.offsets[j], t.offsets[j + 1] - t.offsets[j]);
}

SelectionVector::SelectionVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

SelectionVector SelectionVector::from_mask(std::uint64_t mask, std::size_t m) {
  if (m > 64) fail(ErrorKind::kOutOfBounds, "from_mask supports at most 64 chunks");
  SelectionVector s(m);
  for (std::size_t j = 0; j < m; ++j) s.bits_[j] = static_cast<std::uint8_t>((mask >> j) & 1u);
  return s;
}

SelectionVector SelectionVector::parse(const std::string& text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') fail(ErrorKind::kInvalidConfig, "selection string must be 0/1 only");
    bits.push_back(c == '1' ? 1 : 0);
  }
  return SelectionVector(std::move(bits));
}

std::size_t SelectionVector::retained_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

SelectionVector SelectionVector::complement() const {
  SelectionVector c(*this);
  for (auto& b : c.bits_) b ^= 1u;
  return c;
}

std::string SelectionVector::to_string() const {
  std::string out(bits_.size(), '0');
  for (std::size_t j = 0; j < bits_.size(); ++j) out[j] = bits_[j] ? '1' : '0';
  return out;
}

void apply_mask_into(const InputTensor& x, const SelectionVector& s, const ChunkGrid& grid, InputTensor& out) {
  if (x.shape() != grid.input_shape()) fail(ErrorKind::kShapeMismatch, "grid was built for a different shape");
  if (s.size() != grid.size()) {
    fail(ErrorKind::kLengthMismatch,
         "selection has " + std::to_string(s.size()) + " bits, grid has " + std::to_string(grid.size()) + " chunks");
  }
  if (out.shape() != x.shape()) out = InputTensor::zeros(x.shape());
  const auto owner = grid.owner_table();
  const auto bits = s.bits();
  const auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = bits[owner[i]] ? src[i] : 0.0f;
}

InputTensor apply_mask(const InputTensor& x, const SelectionVector& s, const ChunkGrid& grid) {
  InputTensor out;
  apply_mask_into(x, s, grid, out);
  return out;
}

std::vector<double> chunk_means(std::span<const double> values, const ChunkGrid& grid) {
  if (values.size() != grid.volume()) fail(ErrorKind::kShapeMismatch, "value count differs from grid volume");
  std::vector<double> means(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto coords = grid.coordinates(j);
    double sum = 0.0;
    for (auto c : coords) sum += values[c];
    means[j] = sum / static_cast<double>(coords.size());
  }
  return means;
}

}  // namespace mupax
