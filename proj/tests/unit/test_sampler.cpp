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

#include <cmath>
#include <limits>
#include <atomic>
#include <map>
#include <thread>

#include "mupax/distribution.hpp"
#include "mupax/models.hpp"
#include "mupax/oracle.hpp"
#include "mupax/sampler.hpp"
#include "mupax/stats.hpp"
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

// Upper 1% points of the chi-square distribution.
constexpr double kChi2Df1 = 6.634896601021214;
constexpr double kChi2Df13 = 27.68824961045705;

TEST(Distribution, TwoChunksIsAFairCoin) {
  std::map<std::string, int> counts;
  for (std::uint64_t i = 0; i < 10000; ++i) counts[sample_selection(42, i, 2).to_string()]++;
  ASSERT_EQ(counts.size(), 2u);
  const double e = 5000.0;
  const double chi2 = std::pow(counts["10"] - e, 2) / e + std::pow(counts["01"] - e, 2) / e;
  EXPECT_LT(chi2, kChi2Df1);
}

TEST(Distribution, FourChunksMatchesClosedForm) {
  // 14 admissible masks; P(s) = 1 / (3 * C(4, |s|)).
  std::map<std::uint32_t, int> counts;
  const int n = 20000;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(n); ++i) {
    const auto s = sample_selection(7, i, 4);
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < 4; ++j) mask |= (s[j] ? 1u : 0u) << j;
    counts[mask]++;
  }
  EXPECT_EQ(counts.count(0), 0u);
  EXPECT_EQ(counts.count(15), 0u);
  double chi2 = 0.0;
  double total_p = 0.0;
  for (std::uint32_t mask = 1; mask < 15; ++mask) {
    const double p = StratifiedUniform::probability(4, static_cast<std::size_t>(std::popcount(mask)));
    total_p += p;
    const double e = p * n;
    chi2 += std::pow(counts[mask] - e, 2) / e;
  }
  EXPECT_NEAR(total_p, 1.0, 1e-15);
  EXPECT_LT(chi2, kChi2Df13);
}

TEST(Distribution, MeanRetainedFractionIsHalf) {
  for (std::size_t m : {2u, 3u, 5u, 8u, 16u, 100u}) {
    double sum = 0.0, sum2 = 0.0;
    const int n = 10000;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(n); ++i) {
      const double f = static_cast<double>(sample_selection(3, i, m).retained_count()) / static_cast<double>(m);
      sum += f;
      sum2 += f * f;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - 0.5), 3 * se) << "m=" << m;
  }
}

TEST(Distribution, NeverDegenerate) {
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const auto s = sample_selection(1, i, 3);
    EXPECT_GE(s.retained_count(), 1u);
    EXPECT_LE(s.retained_count(), 2u);
  }
}

TEST(Distribution, TooFewChunks) {
  EXPECT_EQ(kind_of([] { sample_selection(0, 0, 1); }), ErrorKind::kTooFewChunks);
}

TEST(Distribution, SelectionDependsOnlyOnSeedAndIndex) {
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(sample_selection(5, i, 9), sample_selection(5, i, 9));
  int same = 0;
  for (std::uint64_t i = 0; i < 100; ++i) same += sample_selection(5, i, 9) == sample_selection(6, i, 9);
  EXPECT_LT(same, 20);
}

TEST(NearestRank, HandCases) {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  EXPECT_EQ(nearest_rank(v, 20), 20.0);
  EXPECT_EQ(nearest_rank(v, 100), 100.0);
  EXPECT_EQ(nearest_rank(v, 0.5), 1.0);
  const std::vector<double> five(37, 5.0);
  for (double p : {1.0, 20.0, 50.0, 99.0}) EXPECT_EQ(nearest_rank(five, p), 5.0);
  const std::vector<double> ten{3, 1, 2};
  EXPECT_EQ(nearest_rank(ten, 50), 2.0);  // ceil(1.5) = 2nd
}

// m = 12, S* = {0, 1}, eps = 0: mu = 0 exactly when both relevant chunks
// are kept, which under U has probability E[k(k-1)] / (m(m-1)) with
// k ~ U{1..m-1}, i.e. (m-2)/(3(m-1)) = 10/33.
PlantedModelSpec thirty_percent_zero() {
  PlantedModelSpec spec{build_grid({12}, {1}), {0, 1}, {}, 0.0, InputTensor::zeros({12})};
  for (std::size_t i = 0; i < 12; ++i) spec.reference[i] = 0.5f + 0.05f * static_cast<float>(i);
  return spec;
}

TEST(Calibration, ThirtyPercentZeroLossGivesWZero) {
  const auto spec = thirty_percent_zero();
  PlantedPredictor pred(spec);
  const auto oracle = enumerate(pred, spec.reference, spec.grid, 0.0);
  EXPECT_NEAR(oracle.p_w, 10.0 / 33.0, 1e-12);

  SamplerConfig cfg;
  cfg.n_calibration = 1000;
  cfg.percentile_w = 20;
  cfg.seed = 17;
  const auto cal = calibrate_threshold(pred, spec.reference, spec.grid, cfg);
  EXPECT_EQ(cal.threshold.w, 0.0);
  EXPECT_EQ(cal.losses.size(), 1000u);
}

TEST(Calibration, ConstantLossGivesThatLoss) {
  struct Five final : Predictor {
    Shape s{6};
    std::vector<double> evaluate(std::span<const InputTensor> b) const override { return std::vector<double>(b.size(), 5.0); }
    const Shape& input_shape() const override { return s; }
    std::string description() const override { return "five"; }
  } pred;
  const auto x = InputTensor::from({6}, {1, 2, 3, 4, 5, 6});
  for (double p : {5.0, 20.0, 80.0}) {
    SamplerConfig cfg;
    cfg.n_calibration = 50;
    cfg.percentile_w = p;
    EXPECT_EQ(calibrate_threshold(pred, x, build_grid({6}, {2}), cfg).threshold.w, 5.0);
  }
}

TEST(Calibration, RequiresTwentySamples) {
  EchoPredictor pred({4});
  SamplerConfig cfg;
  cfg.n_calibration = 19;
  EXPECT_EQ(kind_of([&] { calibrate_threshold(pred, InputTensor::zeros({4}), build_grid({4}, {1}), cfg); }),
            ErrorKind::kInvalidConfig);
}

TEST(Rejection, InfiniteThresholdAcceptsEverything) {
  EchoPredictor pred({8});
  const auto x = InputTensor::from({8}, {1, 2, 3, 4, 5, 6, 7, 8});
  SamplerConfig cfg;
  cfg.n_target = 300;
  std::vector<std::uint64_t> idx;
  const auto out = rejection_sample(pred, x, build_grid({8}, {2}), std::numeric_limits<double>::infinity(), cfg, 0,
                                    [&](const AcceptedSample& s) { idx.push_back(s.index); });
  EXPECT_FALSE(out.budget_exhausted);
  EXPECT_EQ(out.stats.attempted, 300u);
  EXPECT_EQ(out.stats.p_hat(), 1.0);
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], i);
}

TEST(Rejection, UnreachableThresholdExhaustsBudget) {
  // Every chunk relevant: the all-ones mask is excluded, so mu > 0 always.
  PlantedModelSpec spec{build_grid({6}, {1}), {0, 1, 2, 3, 4, 5}, {}, 0.0, InputTensor::from({6}, {1, 2, 3, 4, 5, 6})};
  PlantedPredictor pred(spec);
  SamplerConfig cfg;
  cfg.n_target = 10;
  cfg.n_total_cap = 500;
  const auto out = rejection_sample(pred, spec.reference, spec.grid, 0.0, cfg, 0, [](const AcceptedSample&) {});
  EXPECT_TRUE(out.budget_exhausted);
  EXPECT_EQ(out.stats.attempted, 500u);
  EXPECT_EQ(out.stats.accepted, 0u);
  EXPECT_EQ(kind_of([&] { out.require_complete(); }), ErrorKind::kBudgetExhausted);
}

TEST(Rejection, AcceptanceRateMatchesOracle) {
  PlantedInstanceConfig pc;
  pc.shape = {8};
  pc.relevant = 3;
  const auto spec = make_planted_instance(pc, 21);
  PlantedPredictor pred(spec);
  const auto oracle = enumerate(pred, spec.reference, spec.grid, 0.5);
  SamplerConfig cfg;
  cfg.n_target = 5000;
  cfg.seed = 99;
  const auto out = rejection_sample(pred, spec.reference, spec.grid, 0.5, cfg, 0, [](const AcceptedSample&) {});
  const double p = oracle.p_w;
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(out.stats.attempted));
  EXPECT_LE(std::abs(out.stats.p_hat() - p), 3 * se) << "p_hat=" << out.stats.p_hat() << " p_W=" << p;
}

TEST(Rejection, AcceptedSequenceIndependentOfWorkersAndBatching) {
  PlantedInstanceConfig pc;
  pc.shape = {10};
  pc.relevant = 4;
  const auto spec = make_planted_instance(pc, 4);
  PlantedPredictor pred(spec);
  auto run = [&](std::size_t workers, std::size_t batch) {
    SamplerConfig cfg;
    cfg.n_target = 700;
    cfg.seed = 8;
    cfg.workers = workers;
    cfg.batch_size = batch;
    std::vector<std::pair<std::uint64_t, double>> seq;
    const auto out = rejection_sample(pred, spec.reference, spec.grid, 0.4, cfg, 256,
                                      [&](const AcceptedSample& s) { seq.emplace_back(s.index, s.mu); });
    return std::make_pair(seq, out.stats.attempted);
  };
  const auto ref = run(1, 32);
  EXPECT_EQ(ref.first.front().first >= 256, true);
  for (auto [w, b] : {std::pair<std::size_t, std::size_t>{8, 32}, {3, 7}, {1, 1}, {8, 200}}) {
    EXPECT_EQ(run(w, b), ref) << "workers=" << w << " batch=" << b;
  }
}

TEST(Rejection, ConcurrencyLimitIsHonored) {
  struct Serial final : Predictor {
    Shape s{6};
    mutable std::atomic<int> active{0};
    mutable std::atomic<int> peak{0};
    std::vector<double> evaluate(std::span<const InputTensor> b) const override {
      const int now = ++active;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(std::chrono::microseconds(200));
      --active;
      return std::vector<double>(b.size(), 0.0);
    }
    const Shape& input_shape() const override { return s; }
    std::string description() const override { return "serial"; }
    std::size_t max_concurrency() const override { return 1; }
  } pred;
  SamplerConfig cfg;
  cfg.n_target = 200;
  cfg.workers = 8;
  cfg.batch_size = 4;
  rejection_sample(pred, InputTensor::from({6}, {1, 1, 1, 1, 1, 1}), build_grid({6}, {3}), 1.0, cfg, 0,
                   [](const AcceptedSample&) {});
  EXPECT_EQ(pred.peak.load(), 1);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig cfg;
  cfg.percentile_w = 0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kInvalidConfig);
  cfg = {};
  cfg.n_target = 10;
  cfg.n_total_cap = 5;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kInvalidConfig);
  EXPECT_EQ(SamplerConfig{}.cap(), 100000u);
}

}  // namespace
}  // namespace mupax
