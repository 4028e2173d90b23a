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
#include <span>
#include <string>
#include <vector>

#include "mupax/tensor.hpp"

namespace mupax {

/// Partition of an N-d shape into hyper-rectangular chunks of `chunk_shape`.
///
/// Chunk counts per axis are ceil(d_i / c_i); the last chunk on an axis is
/// ragged when c_i does not divide d_i. Chunks are numbered row-major over
/// the chunk multi-index, and that numbering is part of the on-disk meaning
/// of a SelectionVector, so it must not change.
class ChunkGrid {
 public:
  ChunkGrid(Shape input_shape, Shape chunk_shape);

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& chunk_shape() const noexcept { return chunk_shape_; }
  const Shape& chunk_counts() const noexcept { return chunk_counts_; }
  std::size_t size() const noexcept { return m_; }
  std::size_t volume() const noexcept { return tables_->owner.size(); }

  std::size_t chunk_of(std::span<const std::size_t> coord) const;
  std::size_t chunk_of_flat(std::size_t flat) const { return tables_->owner.at(flat); }

  /// Half-open coordinate box [lo, hi) of chunk j.
  void chunk_box(std::size_t j, std::vector<std::size_t>& lo, std::vector<std::size_t>& hi) const;

  /// Flat row-major offsets of every coordinate in chunk j, ascending.
  std::span<const std::uint32_t> coordinates(std::size_t j) const;
  std::size_t chunk_volume(std::size_t j) const { return coordinates(j).size(); }

  /// Flat offset -> owning chunk, for every coordinate of the input.
  std::span<const std::uint32_t> owner_table() const noexcept { return tables_->owner; }

  friend bool operator==(const ChunkGrid& a, const ChunkGrid& b) {
    return a.input_shape_ == b.input_shape_ && a.chunk_shape_ == b.chunk_shape_;
  }

 private:
  struct Tables {
    std::vector<std::uint32_t> owner;
    std::vector<std::uint32_t> members;  // coordinates grouped by chunk
    std::vector<std::size_t> offsets;    // m + 1 entries into members
  };

  Shape input_shape_;
  Shape chunk_shape_;
  Shape chunk_counts_;
  std::size_t m_ = 0;
  std::shared_ptr<const Tables> tables_;
};

/// Equivalent to constructing a ChunkGrid; exists so call sites read like
/// the rest of the free-function API.
inline ChunkGrid build_grid(Shape input_shape, Shape chunk_shape) {
  return ChunkGrid(std::move(input_shape), std::move(chunk_shape));
}

/// Bit per chunk: 1 keeps the chunk, 0 zeroes it.
class SelectionVector {
 public:
  SelectionVector() = default;
  explicit SelectionVector(std::size_t m, bool value = false) : bits_(m, value ? 1 : 0) {}
  explicit SelectionVector(std::vector<std::uint8_t> bits);

  /// Low `m` bits of `mask`, bit j -> chunk j.
  static SelectionVector from_mask(std::uint64_t mask, std::size_t m);
  /// Parses "1010..." (chunk 0 first).
  static SelectionVector parse(const std::string& text);

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t j) const { return bits_[j] != 0; }
  void set(std::size_t j, bool v) { bits_.at(j) = v ? 1 : 0; }
  void reset(std::size_t m) { bits_.assign(m, 0); }
  std::size_t retained_count() const noexcept;
  SelectionVector complement() const;
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::string to_string() const;

  friend bool operator==(const SelectionVector&, const SelectionVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// X o F^s: coordinates in unselected chunks become exactly 0.
InputTensor apply_mask(const InputTensor& x, const SelectionVector& s, const ChunkGrid& grid);

/// Same as apply_mask but writes into `out`, reusing its storage.
void apply_mask_into(const InputTensor& x, const SelectionVector& s, const ChunkGrid& grid, InputTensor& out);

/// Mean of `values` over each chunk's coordinates.
std::vector<double> chunk_means(std::span<const double> values, const ChunkGrid& grid);

}  // namespace mupax
