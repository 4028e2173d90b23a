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

#include <algorithm>
#include <cmath>

#include "mupax/attribution.hpp"
#include "mupax/distribution.hpp"
#include "mupax/exact_sum.hpp"
#include "mupax/models.hpp"
#include "mupax/rng.hpp"
#include "mupax/synthetic.hpp"

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

TEST(ExactSum, MatchesLongDoubleOnSmallSums) {
  ExactSum s;
  s.add(0.1);
  s.add(0.2);
  s.add(0.3);
  EXPECT_EQ(s.value(), static_cast<double>(0.1L + 0.2L + 0.3L));
}

TEST(ExactSum, OrderAndSplitInvariant) {
  CounterRng rng(1, 2);
  std::vector<double> v;
  for (int i = 0; i < 5000; ++i) v.push_back(std::ldexp(rng.uniform(), static_cast<int>(rng.below(80)) - 40));
  ExactSum a;
  for (double x : v) a.add(x);
  std::reverse(v.begin(), v.end());
  ExactSum b, c;
  for (std::size_t i = 0; i < v.size(); ++i) (i % 3 == 0 ? b : c).add(v[i]);
  c.merge(b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a.value(), c.value());
}

TEST(ExactSum, CancellationFreeTinyPlusHuge) {
  ExactSum s;
  s.add(0x1p60);
  s.add(0x1p-1074);
  EXPECT_EQ(s.value(), 0x1p60);
  ExactSum t;
  for (int i = 0; i < 1 << 10; ++i) t.add(0x1p-1074);
  EXPECT_EQ(t.value(), 0x1p-1064);
  EXPECT_TRUE(ExactSum{}.is_zero());
}

TEST(ExactSum, RoundsHalfToEven) {
  ExactSum s;
  s.add(1.0);
  s.add(0x1p-53);  // exactly halfway between 1 and 1 + 2^-52
  EXPECT_EQ(s.value(), 1.0);
  s.add(0x1p-60);  // now above halfway
  EXPECT_EQ(s.value(), 1.0 + 0x1p-52);
}

TEST(Weight, Values) {
  EXPECT_EQ(weight(0), 1.0);
  EXPECT_EQ(weight(1), 0.5);
  EXPECT_EQ(weight(3), 0.25);
}

TEST(Accumulator, SingleSample) {
  const auto x = InputTensor::from({4}, {1, 2, 3, 4});
  const auto g = build_grid({4}, {2});
  Accumulator acc(x, g);
  acc.add(SelectionVector::parse("01"), 1.0);
  const auto map = finalize(acc, 1.0, 1.0);
  EXPECT_EQ(map.chi, RealTensor::from({4}, {0, 0, 1.5, 2}));
  EXPECT_EQ(map.se, RealTensor::zeros({4}));
}

TEST(Accumulator, FullRetentionZeroLossGivesX) {
  const auto x = InputTensor::from({4}, {1, 2, 3, 4});
  Accumulator acc(x, build_grid({4}, {1}));
  acc.add(SelectionVector(4, true), 0.0);
  acc.add(apply_mask(x, SelectionVector(4, true), acc.grid()), SelectionVector(4, true), 0.0);
  EXPECT_EQ(finalize(acc, 0, 1).chi, x.cast<double>());
}

TEST(Accumulator, TenHandListedSamplesMatchDirectSum) {
  const auto x = InputTensor::from({4}, {0.5f, 1.25f, 2.0f, 3.5f});
  const auto g = build_grid({4}, {1});
  const std::vector<std::pair<std::string, double>> samples{
      {"1000", 0.0}, {"1100", 0.5}, {"0110", 1.0}, {"0011", 2.0}, {"1010", 0.25},
      {"0101", 3.0}, {"1110", 0.75}, {"0111", 1.5}, {"1001", 4.0}, {"0100", 0.1}};
  Accumulator acc(x, g);
  for (const auto& [bits, mu] : samples) acc.add(SelectionVector::parse(bits), mu);
  const auto map = finalize(acc, 5.0, 1.0);

  // Direct per-coordinate evaluation of the defining sums.
  for (std::size_t a = 0; a < 4; ++a) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& [bits, mu] : samples) {
      const double v = bits[a] == '1' ? (1.0 / (mu + 1.0)) * x[a] : 0.0;
      sum += v;
      sum2 += v * v;
    }
    const double chi = sum / 10.0;
    EXPECT_NEAR(map.chi[a], chi, 1e-12);
    EXPECT_NEAR(map.se[a], std::sqrt(std::max(0.0, sum2 / 10.0 - chi * chi) / 10.0), 1e-12);
  }
  EXPECT_EQ(acc.n(), 10u);
  EXPECT_EQ(acc.retained_count(1), 6u);
}

TEST(Finalize, TwoSamplesStandardError) {
  // Coordinate 0 sees contributions a = 2 (mu = 0) and b = 1 (mu = 1).
  const auto x = InputTensor::from({2}, {2, 7});
  Accumulator acc(x, build_grid({2}, {1}));
  acc.add(SelectionVector::parse("10"), 0.0);
  acc.add(SelectionVector::parse("10"), 1.0);
  const auto map = finalize(acc, 1, 1);
  const double a = 2, b = 1;
  EXPECT_DOUBLE_EQ(map.chi[0], (a + b) / 2);
  EXPECT_DOUBLE_EQ(map.se[0], std::sqrt(((a * a + b * b) / 2 - std::pow((a + b) / 2, 2)) / 2));
  EXPECT_DOUBLE_EQ(map.se[0], std::abs(a - b) / (2 * std::sqrt(2.0)));
  EXPECT_EQ(map.chi[1], 0.0);
}

TEST(Finalize, ConstantContributionsHaveZeroSe) {
  const auto x = InputTensor::from({3}, {1, 2, 3});
  Accumulator acc(x, build_grid({3}, {1}));
  for (int i = 0; i < 7; ++i) acc.add(SelectionVector::parse("110"), 0.3);
  const auto map = finalize(acc, 1, 1);
  for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(map.se[a], 0.0);
}

TEST(Finalize, EmptyAccumulator) {
  Accumulator acc(InputTensor::from({2}, {1, 1}), build_grid({2}, {1}));
  EXPECT_EQ(kind_of([&] { finalize(acc, 0, 0); }), ErrorKind::kEmptyAccumulator);
  EXPECT_EQ(kind_of([&] { decompose(acc); }), ErrorKind::kEmptyAccumulator);
}

TEST(Accumulator, RejectsBadInput) {
  Accumulator acc(InputTensor::from({2}, {1, 1}), build_grid({2}, {1}));
  EXPECT_EQ(kind_of([&] { acc.add(SelectionVector(3), 0.0); }), ErrorKind::kShapeMismatch);
  EXPECT_EQ(kind_of([&] { acc.add(SelectionVector(2), -1.0); }), ErrorKind::kInvalidLoss);
  EXPECT_EQ(kind_of([&] { acc.add(InputTensor::zeros({3}), SelectionVector(2), 0.0); }), ErrorKind::kShapeMismatch);
}

TEST(Accumulator, MergeIsOrderInvariantBitForBit) {
  const auto spec = make_planted_instance({{12}, {1}, 3, 2, 0.1, 0.1f, 1.0f}, 77);
  PlantedPredictor pred(spec);
  CounterRng rng(3, 3);
  std::vector<std::pair<SelectionVector, double>> stream;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto s = sample_selection(5, i, 12);
    stream.emplace_back(s, evaluate_one(pred, apply_mask(spec.reference, s, spec.grid)));
  }
  Accumulator whole(spec.reference, spec.grid);
  for (const auto& [s, mu] : stream) whole.add(s, mu);

  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Accumulator> parts(1 + rng.below(7), Accumulator(spec.reference, spec.grid));
    for (const auto& [s, mu] : stream) parts[rng.below(parts.size())].add(s, mu);
    Accumulator merged(spec.reference, spec.grid);
    for (std::size_t k = parts.size(); k-- > 0;) merged.merge(parts[k]);
    EXPECT_EQ(merged, whole);
    const auto a = finalize(merged, 1, 1), b = finalize(whole, 1, 1);
    EXPECT_EQ(a.chi, b.chi);
    EXPECT_EQ(a.se, b.se);
  }
}

TEST(Decompose, NeverAndAlwaysRetained) {
  const auto x = InputTensor::from({3}, {1, 2, 3});
  Accumulator acc(x, build_grid({3}, {1}));
  acc.add(SelectionVector::parse("110"), 0.0);
  acc.add(SelectionVector::parse("100"), 1.0);
  acc.add(SelectionVector::parse("110"), 3.0);
  const auto d = decompose(acc);
  const auto map = finalize(acc, 3, 1);
  EXPECT_EQ(d.retention[2], 0.0);
  EXPECT_FALSE(d.goodness[2].has_value());
  EXPECT_EQ(map.chi[2], 0.0);
  EXPECT_EQ(d.retention[0], 1.0);
  EXPECT_DOUBLE_EQ(*d.goodness[0], (1.0 + 0.5 + 0.25) / 3);
  EXPECT_DOUBLE_EQ(d.retention[1], 2.0 / 3);
  EXPECT_DOUBLE_EQ(*d.goodness[1], (1.0 + 0.25) / 2);
  EXPECT_LE(d.max_identity_residual, kDecompositionTolerance);
}

TEST(Decompose, IdentityOnRandomRuns) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = make_planted_instance({{6, 5}, {2, 2}, 2, 2, 0.2, 0.1f, 1.0f}, seed);
    PlantedPredictor pred(spec);
    SamplerConfig cfg;
    cfg.n_target = 300;
    cfg.n_calibration = 64;
    cfg.seed = seed;
    const auto e = explain(pred, spec.reference, spec.grid, cfg);
    for (std::size_t a = 0; a < e.map.chi.size(); ++a) {
      const std::size_t j = spec.grid.chunk_of_flat(a);
      const double g = e.decomposition.goodness[j].value_or(0.0);
      const double rhs = spec.reference[a] * e.decomposition.retention[j] * g;
      EXPECT_LE(std::abs(e.map.chi[a] - rhs), 1e-9 * std::max(1.0, std::abs(e.map.chi[a])));
    }
  }
}

TEST(Boundedness, ChiBetweenZeroAndX) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto spec = make_planted_instance({{9}, {2}, 2, 1, 0.5, 0.0f, 3.0f}, seed);
    PlantedPredictor pred(spec);
    SamplerConfig cfg;
    cfg.n_target = 100;
    cfg.n_calibration = 32;
    cfg.seed = seed;
    const auto e = explain(pred, spec.reference, spec.grid, cfg);
    for (std::size_t a = 0; a < e.map.chi.size(); ++a) {
      EXPECT_GE(e.map.chi[a], 0.0);
      EXPECT_LE(e.map.chi[a], static_cast<double>(spec.reference[a]));
    }
  }
}

TEST(ThresholdMask, Ties) {
  const auto g = build_grid({4}, {1});
  SaliencyMap equal{RealTensor::from({4}, {2, 2, 2, 2}), RealTensor::zeros({4}), 1, 0, 1};
  EXPECT_EQ(threshold_mask(equal, g).to_string(), "1111");
  SaliencyMap spike{RealTensor::from({4}, {0, 0, 0, 10}), RealTensor::zeros({4}), 1, 0, 1};
  EXPECT_EQ(threshold_mask(spike, g, 50).to_string(), "1111");
  EXPECT_EQ(threshold_mask(spike, g, 90).to_string(), "0001");
}

TEST(ThresholdMask, UsesChunkMeans) {
  const auto g = build_grid({4}, {2});
  SaliencyMap map{RealTensor::from({4}, {0, 4, 1, 1}), RealTensor::zeros({4}), 1, 0, 1};
  // Chunk means 2 and 1; the 60th percentile of {1, 2} is 2.
  EXPECT_EQ(threshold_mask(map, g, 60).to_string(), "10");
}

TEST(Explain, BudgetExhaustedOnlyWithoutAnyAcceptance) {
  PlantedModelSpec spec{build_grid({4}, {1}), {0, 1, 2, 3}, {}, 0.0, InputTensor::from({4}, {1, 2, 3, 4})};
  PlantedPredictor pred(spec);
  SamplerConfig cfg;
  cfg.n_target = 5;
  cfg.n_total_cap = 50;
  EXPECT_EQ(kind_of([&] { explain(pred, spec.reference, spec.grid, cfg, 0.0); }), ErrorKind::kBudgetExhausted);

  // A threshold met by a few draws gives a partial result.
  cfg.n_target = 1000;
  cfg.n_total_cap = 1000;
  const auto e = explain(pred, spec.reference, spec.grid, cfg, 0.3);
  EXPECT_TRUE(e.partial);
  EXPECT_GT(e.map.n, 0u);
  EXPECT_LT(e.map.n, 1000u);
}

// Two relevant chunks out of 16 keep P(mu = 0) = 14/45 above the 20th
// percentile, so W = 0 and every accepted draw retains all of S*.
TEST(Explain, PlantedMaskKeepsRelevantChunks) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = make_planted_instance({{16}, {1}, 2, 0, 0.0, 0.9f, 1.0f}, seed);
    PlantedPredictor pred(spec);
    SamplerConfig cfg;
    cfg.n_target = 200;
    cfg.n_calibration = 128;
    cfg.seed = seed;
    const auto e = explain(pred, spec.reference, spec.grid, cfg);
    const auto mask = threshold_mask(e.map, spec.grid, 50);
    bool all = true;
    for (std::size_t j : spec.relevant) all = all && mask[j];
    hits += all;
  }
  EXPECT_GE(hits, 95);
}

}  // namespace
}  // namespace mupax
