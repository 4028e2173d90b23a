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

#include <gtest/gtest.h>

#include <set>

#include "mupax/chunking.hpp"
#include "mupax/rng.hpp"

namespace mupax {
namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mupax::Error thrown";
  return ErrorKind::kIo;
}

TEST(ChunkGrid, Counts) {
  EXPECT_EQ(build_grid({128, 128}, {8, 8}).size(), 256u);
  EXPECT_EQ(build_grid({32, 32, 32}, {8, 8, 8}).size(), 64u);
  const auto g = build_grid({5}, {2});
  EXPECT_EQ(g.size(), 3u);
  ASSERT_EQ(g.chunk_volume(2), 1u);
  EXPECT_EQ(g.coordinates(2)[0], 4u);
}

TEST(ChunkGrid, ChunkOf) {
  const std::vector<std::size_t> a{3};
  EXPECT_EQ(build_grid({4}, {2}).chunk_of(a), 1u);
  const std::vector<std::size_t> b{3, 0};
  EXPECT_EQ(build_grid({4, 4}, {2, 2}).chunk_of(b), 2u);
  const std::vector<std::size_t> c{4};
  EXPECT_EQ(build_grid({5}, {2}).chunk_of(c), 2u);
  const std::vector<std::size_t> out{5};
  EXPECT_EQ(kind_of([&] { build_grid({5}, {2}).chunk_of(out); }), ErrorKind::kOutOfBounds);
}

TEST(ChunkGrid, Errors) {
  EXPECT_EQ(kind_of([] { build_grid({4, 4}, {2}); }), ErrorKind::kRankMismatch);
  EXPECT_EQ(kind_of([] { build_grid({4}, {0}); }), ErrorKind::kZeroChunkExtent);
}

TEST(ChunkGrid, RandomGridsArePartitions) {
  CounterRng rng(5, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rank = 1 + rng.below(3);
    Shape shape, chunk;
    std::size_t expected_m = 1;
    for (std::size_t i = 0; i < rank; ++i) {
      shape.push_back(1 + rng.below(9));
      chunk.push_back(1 + rng.below(shape.back()));
      expected_m *= (shape.back() + chunk.back() - 1) / chunk.back();
    }
    const ChunkGrid g(shape, chunk);
    ASSERT_EQ(g.size(), expected_m);
    std::vector<int> seen(g.volume(), 0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      ASSERT_GT(g.chunk_volume(j), 0u);
      std::vector<std::size_t> lo, hi;
      g.chunk_box(j, lo, hi);
      for (std::uint32_t flat : g.coordinates(j)) {
        ++seen[flat];
        EXPECT_EQ(g.chunk_of_flat(flat), j);
        const auto idx = unravel(flat, shape);
        for (std::size_t d = 0; d < rank; ++d) {
          EXPECT_GE(idx[d], lo[d]);
          EXPECT_LT(idx[d], hi[d]);
        }
      }
    }
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(ApplyMask, IdentityZeroAndHalf) {
  const auto x = InputTensor::from({4}, {1, 2, 3, 4});
  const auto g = build_grid({4}, {2});
  EXPECT_EQ(apply_mask(x, SelectionVector(2, true), g), x);
  EXPECT_EQ(apply_mask(x, SelectionVector(2, false), g), InputTensor::zeros({4}));
  EXPECT_EQ(apply_mask(x, SelectionVector::parse("10"), g), InputTensor::from({4}, {1, 2, 0, 0}));
}

TEST(ApplyMask, Mismatches) {
  const auto x = InputTensor::from({4}, {1, 2, 3, 4});
  EXPECT_EQ(kind_of([&] { apply_mask(x, SelectionVector(3), build_grid({4}, {2})); }), ErrorKind::kLengthMismatch);
  EXPECT_EQ(kind_of([&] { apply_mask(x, SelectionVector(2), build_grid({6}, {3})); }), ErrorKind::kShapeMismatch);
}

TEST(SelectionVector, MaskAndText) {
  const auto s = SelectionVector::from_mask(0b0101, 4);
  EXPECT_EQ(s.to_string(), "1010");
  EXPECT_EQ(s.retained_count(), 2u);
  EXPECT_EQ(s.complement().to_string(), "0101");
  EXPECT_EQ(SelectionVector::parse("1010"), s);
}

TEST(ChunkMeans, Ragged) {
  const auto g = build_grid({5}, {2});
  const std::vector<double> v{1, 3, 5, 7, 9};
  EXPECT_EQ(chunk_means(v, g), (std::vector<double>{2, 6, 9}));
}

}  // namespace
}  // namespace mupax
