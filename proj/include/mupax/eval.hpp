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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupax/attribution.hpp"
#include "mupax/models.hpp"
#include "mupax/synthetic.hpp"

namespace mupax {

/// Standard multi-class scores. Averages run over the classes that occur in
/// either the truth or the predictions; a class with no predicted (or no
/// true) instances has precision (or recall) 0.
struct ClassificationMetrics {
  std::vector<std::size_t> classes;
  std::vector<double> precision_per_class;
  std::vector<double> recall_per_class;
  std::vector<double> f1_per_class;
  std::vector<std::size_t> support;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
};

ClassificationMetrics classification_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> predicted);

struct ConditionReport {
  std::string name;
  ClassificationMetrics metrics;
  double runtime_mean = 0.0;  // seconds
  double runtime_sd = 0.0;
};

struct DeletionPoint {
  double fraction = 0.0;
  double loss = 0.0;
};

struct EvalReport {
  std::vector<ConditionReport> conditions;
  std::vector<DeletionPoint> deletion;

  nlohmann::json to_json() const;
  std::string deletion_csv() const;
};

/// Classifies each instance on the full input and on X masked by its own
/// selection vector. Throws LabelMismatch when a label is outside the
/// classifier's classes or the mask count differs from the dataset size.
EvalReport masked_task_metrics(const Classifier& classifier, std::span<const LabeledInstance> data,
                               std::span<const SelectionVector> masks, const ChunkGrid& grid);

enum class DeletionOrder { kTopFirst, kBottomFirst };

/// Chunks by descending mean chi, ties to the lower index.
std::vector<std::size_t> rank_chunks(const SaliencyMap& map, const ChunkGrid& grid);

/// For each fraction f in (0, 1] (ascending), zero the ceil(f * m)
/// highest-ranked (or lowest-ranked) chunks and record mu.
std::vector<DeletionPoint> deletion_faithfulness(const SaliencyMap& map, const InputTensor& x, const ChunkGrid& grid,
                                                 const Predictor& predictor, std::span<const double> fractions,
                                                 DeletionOrder order = DeletionOrder::kTopFirst);

struct TaskEvalConfig {
  SamplerConfig sampler;
  double mask_percentile = 50.0;
  std::vector<double> fractions{0.05, 0.1, 0.2, 0.4};
  std::size_t repeats = 5;
};

/// Full pipeline on a two-class task: explain every instance against its
/// true label, derive masks, score full vs masked inputs, time both
/// conditions over `repeats` runs and average the deletion curves.
EvalReport run_task_eval(const TwoClassTask& task, const TaskEvalConfig& config);

/// Share of sum(chi) that falls on the planted model's relevant chunks.
double relevant_mass_share(const RealTensor& chi, const PlantedModelSpec& spec);

struct SweepRow {
  Shape chunk;
  std::uint64_t n_target = 0;
  double percentile_w = 0.0;
  double w = 0.0;
  double p_hat = 0.0;
  std::uint64_t attempted = 0;
  double relevant_share = 0.0;  // NaN without a planted spec
  double seconds = 0.0;
  bool partial = false;
};

/// Cross product chunk x n_target x percentile_w, one explanation per cell,
/// rows in that nesting order.
std::vector<SweepRow> run_sweep(const Predictor& predictor, const InputTensor& x, std::span<const Shape> chunks,
                                std::span<const std::uint64_t> n_targets, std::span<const double> percentiles,
                                const SamplerConfig& base, const PlantedModelSpec* planted = nullptr);

std::string sweep_table(std::span<const SweepRow> rows);
nlohmann::json sweep_json(std::span<const SweepRow> rows);

}  // namespace mupax
