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

#include "mupax/eval.hpp"
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

TEST(Metrics, SixInstanceFixture) {
  // Confusion by hand:
  //   class 0: tp 2 fp 0 fn 1 -> P 1,   R 2/3, F1 4/5
  //   class 1: tp 1 fp 1 fn 1 -> P 1/2, R 1/2, F1 1/2
  //   class 2: tp 1 fp 1 fn 0 -> P 1/2, R 1,   F1 2/3
  const std::vector<std::size_t> truth{0, 0, 0, 1, 1, 2};
  const std::vector<std::size_t> pred{0, 0, 1, 1, 2, 2};
  const auto m = classification_metrics(truth, pred);
  EXPECT_EQ(m.classes, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(m.support, (std::vector<std::size_t>{3, 2, 1}));
  EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.recall, 13.0 / 18.0, 1e-15);
  EXPECT_NEAR(m.macro_f1, 59.0 / 90.0, 1e-15);
  EXPECT_NEAR(m.weighted_f1, 61.0 / 90.0, 1e-15);
  EXPECT_NEAR(m.accuracy, 4.0 / 6.0, 1e-15);
}

TEST(Metrics, SingleClassDataset) {
  const std::vector<std::size_t> truth{1, 1, 1, 1};
  const std::vector<std::size_t> perfect{1, 1, 1, 1};
  const auto p = classification_metrics(truth, perfect);
  EXPECT_EQ(p.weighted_f1, p.recall);
  EXPECT_EQ(p.weighted_f1, p.f1_per_class[0]);
  // With a mistake the predicted-only class 0 has no support, so weighted F1
  // still equals the true class's F1.
  const std::vector<std::size_t> one_wrong{1, 1, 0, 1};
  const auto q = classification_metrics(truth, one_wrong);
  ASSERT_EQ(q.classes, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(q.weighted_f1, q.f1_per_class[1], 1e-15);
  EXPECT_NEAR(q.f1_per_class[1], 6.0 / 7.0, 1e-15);
  EXPECT_EQ(q.recall_per_class[1], 0.75);
}

TEST(Metrics, Errors) {
  const std::vector<std::size_t> a{0, 1}, b{0};
  EXPECT_EQ(kind_of([&] { classification_metrics(a, b); }), ErrorKind::kLabelMismatch);
  const std::vector<std::size_t> none;
  EXPECT_EQ(kind_of([&] { classification_metrics(none, none); }), ErrorKind::kEmptyInput);
}

TEST(MaskedTask, AllOnesMasksMatchFullInput) {
  TwoClassTaskConfig cfg;
  cfg.instances = 12;
  const auto task = make_two_class_task(cfg, 1);
  const std::vector<SelectionVector> ones(task.data.size(), SelectionVector(task.grid.size(), true));
  const auto rep = masked_task_metrics(*task.classifier, task.data, ones, task.grid);
  ASSERT_EQ(rep.conditions.size(), 2u);
  const auto& f = rep.conditions[0].metrics;
  const auto& m = rep.conditions[1].metrics;
  EXPECT_EQ(f.macro_f1, m.macro_f1);
  EXPECT_EQ(f.weighted_f1, m.weighted_f1);
  EXPECT_EQ(f.precision, m.precision);
  EXPECT_EQ(f.recall, m.recall);
}

TEST(MaskedTask, LabelMismatch) {
  TwoClassTaskConfig cfg;
  cfg.instances = 4;
  auto task = make_two_class_task(cfg, 1);
  const std::vector<SelectionVector> three(3, SelectionVector(task.grid.size(), true));
  EXPECT_EQ(kind_of([&] { masked_task_metrics(*task.classifier, task.data, three, task.grid); }),
            ErrorKind::kLabelMismatch);
  task.data[0].label = 5;
  const std::vector<SelectionVector> four(4, SelectionVector(task.grid.size(), true));
  EXPECT_EQ(kind_of([&] { masked_task_metrics(*task.classifier, task.data, four, task.grid); }),
            ErrorKind::kLabelMismatch);
}

TEST(Deletion, FullDeletionOfPlantedModelIsOne) {
  const auto spec = make_planted_instance({{8}, {1}, 2, 2, 0.4, 0.1f, 1.0f}, 3);
  PlantedPredictor pred(spec);
  SaliencyMap map{spec.reference.cast<double>(), RealTensor::zeros({8}), 1, 0, 1};
  const std::vector<double> fractions{0.25, 0.5, 1.0};
  const auto curve = deletion_faithfulness(map, spec.reference, spec.grid, pred, fractions);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[2].loss, 1.0);
  EXPECT_EQ(curve[0].fraction, 0.25);
}

TEST(Deletion, FractionsValidated) {
  const auto spec = make_planted_instance({{8}, {1}, 2, 0, 0.0, 0.1f, 1.0f}, 3);
  PlantedPredictor pred(spec);
  SaliencyMap map{spec.reference.cast<double>(), RealTensor::zeros({8}), 1, 0, 1};
  for (const std::vector<double>& bad : {std::vector<double>{0.0, 0.5}, {0.5, 0.2}, {0.5, 1.5}, {0.3, 0.3}}) {
    EXPECT_EQ(kind_of([&] { deletion_faithfulness(map, spec.reference, spec.grid, pred, bad); }),
              ErrorKind::kInvalidConfig);
  }
}

TEST(Deletion, RankingBreaksTiesByIndex) {
  const auto g = build_grid({4}, {1});
  SaliencyMap map{RealTensor::from({4}, {1, 3, 3, 1}), RealTensor::zeros({4}), 1, 0, 1};
  EXPECT_EQ(rank_chunks(map, g), (std::vector<std::size_t>{1, 2, 0, 3}));
  EchoPredictor echo({4});
  const auto x = InputTensor::from({4}, {1, 2, 4, 8});
  const std::vector<double> quarter{0.25};
  // Top-first removes chunk 1, bottom-first removes chunk 0.
  EXPECT_EQ(deletion_faithfulness(map, x, g, echo, quarter, DeletionOrder::kTopFirst)[0].loss, 13.0);
  EXPECT_EQ(deletion_faithfulness(map, x, g, echo, quarter, DeletionOrder::kBottomFirst)[0].loss, 14.0);
}

TEST(TaskEval, SmokeReportShape) {
  TwoClassTaskConfig tc;
  tc.instances = 6;
  const auto task = make_two_class_task(tc, 2);
  TaskEvalConfig cfg;
  cfg.sampler.n_target = 50;
  cfg.sampler.n_calibration = 64;
  cfg.repeats = 2;
  const auto rep = run_task_eval(task, cfg);
  ASSERT_EQ(rep.conditions.size(), 2u);
  EXPECT_EQ(rep.deletion.size(), cfg.fractions.size());
  for (const auto& c : rep.conditions) {
    EXPECT_GE(c.metrics.macro_f1, 0.0);
    EXPECT_LE(c.metrics.macro_f1, 1.0);
    EXPECT_GE(c.runtime_mean, 0.0);
  }
  const auto j = rep.to_json();
  EXPECT_TRUE(j.contains("conditions"));
  EXPECT_NE(rep.deletion_csv().find("fraction"), std::string::npos);
}

TEST(Sweep, RelevantShareAndTable) {
  const auto spec = make_planted_instance({{16}, {1}, 3, 0, 0.0, 0.5f, 1.0f}, 6);
  PlantedPredictor pred(spec);
  RealTensor chi = RealTensor::zeros({16});
  for (std::size_t j : spec.relevant) chi[j] = 1.0;
  chi[spec.relevant[0] == 0 ? 1 : 0] = 1.0;
  EXPECT_DOUBLE_EQ(relevant_mass_share(chi, spec), 0.75);

  SamplerConfig base;
  base.n_target = 100;
  base.n_calibration = 64;
  const std::vector<Shape> chunks{{1}, {2}};
  const std::vector<std::uint64_t> ns{100};
  const std::vector<double> ps{20, 50};
  const auto rows = run_sweep(pred, spec.reference, chunks, ns, ps, base, nullptr);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].percentile_w, 50.0);
  EXPECT_EQ(rows[2].chunk, (Shape{2}));
  EXPECT_TRUE(std::isnan(rows[0].relevant_share));
  const auto table = sweep_table(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}

}  // namespace
}  // namespace mupax
