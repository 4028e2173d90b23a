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

#include "mupax/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mupax/rng.hpp"
#include "mupax/stats.hpp"

namespace mupax {

ClassificationMetrics classification_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> predicted) {
  if (truth.empty()) fail(ErrorKind::kEmptyInput, "no instances to score");
  if (truth.size() != predicted.size()) fail(ErrorKind::kLabelMismatch, "truth and prediction counts differ");
  std::set<std::size_t> cls(truth.begin(), truth.end());
  cls.insert(predicted.begin(), predicted.end());

  ClassificationMetrics m;
  m.classes.assign(cls.begin(), cls.end());
  const std::size_t k = m.classes.size();
  m.precision_per_class.assign(k, 0.0);
  m.recall_per_class.assign(k, 0.0);
  m.f1_per_class.assign(k, 0.0);
  m.support.assign(k, 0);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t label = m.classes[c];
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == label, p = predicted[i] == label;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    m.support[c] = tp + fn;
    const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.precision_per_class[c] = prec;
    m.recall_per_class[c] = rec;
    m.f1_per_class[c] = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  const double kd = static_cast<double>(k);
  m.precision = std::accumulate(m.precision_per_class.begin(), m.precision_per_class.end(), 0.0) / kd;
  m.recall = std::accumulate(m.recall_per_class.begin(), m.recall_per_class.end(), 0.0) / kd;
  m.macro_f1 = std::accumulate(m.f1_per_class.begin(), m.f1_per_class.end(), 0.0) / kd;
  for (std::size_t c = 0; c < k; ++c) {
    m.weighted_f1 += m.f1_per_class[c] * static_cast<double>(m.support[c]) / static_cast<double>(truth.size());
  }
  return m;
}

namespace {

std::vector<std::size_t> check_labels(const Classifier& classifier, std::span<const LabeledInstance> data) {
  std::vector<std::size_t> truth;
  truth.reserve(data.size());
  for (const auto& inst : data) {
    if (inst.label >= classifier.num_classes()) fail(ErrorKind::kLabelMismatch, "label outside classifier classes");
    truth.push_back(inst.label);
  }
  return truth;
}

nlohmann::json metrics_json(const ClassificationMetrics& m) {
  return {{"precision", m.precision},   {"recall", m.recall},   {"macro_f1", m.macro_f1},
          {"weighted_f1", m.weighted_f1}, {"accuracy", m.accuracy}, {"classes", m.classes},
          {"f1_per_class", m.f1_per_class}, {"support", m.support}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EvalReport masked_task_metrics(const Classifier& classifier, std::span<const LabeledInstance> data,
                               std::span<const SelectionVector> masks, const ChunkGrid& grid) {
  if (data.empty()) fail(ErrorKind::kEmptyInput, "empty dataset");
  if (masks.size() != data.size()) fail(ErrorKind::kLabelMismatch, "need exactly one mask per instance");
  const auto truth = check_labels(classifier, data);
  std::vector<std::size_t> full, masked;
  for (std::size_t i = 0; i < data.size(); ++i) {
    full.push_back(classifier.predict(data[i].x));
    masked.push_back(classifier.predict(apply_mask(data[i].x, masks[i], grid)));
  }
  EvalReport rep;
  rep.conditions.push_back({"full", classification_metrics(truth, full), 0.0, 0.0});
  rep.conditions.push_back({"mupax_mask", classification_metrics(truth, masked), 0.0, 0.0});
  return rep;
}

std::vector<std::size_t> rank_chunks(const SaliencyMap& map, const ChunkGrid& grid) {
  const auto scores = chunk_means(map.chi.data(), grid);
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<DeletionPoint> deletion_faithfulness(const SaliencyMap& map, const InputTensor& x, const ChunkGrid& grid,
                                                 const Predictor& predictor, std::span<const double> fractions,
                                                 DeletionOrder order) {
  double prev = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) fail(ErrorKind::kInvalidConfig, "deletion fractions must lie in (0, 1]");
    if (!(f > prev)) fail(ErrorKind::kInvalidConfig, "deletion fractions must be strictly increasing");
    prev = f;
  }
  auto ranked = rank_chunks(map, grid);
  if (order == DeletionOrder::kBottomFirst) {
    // Lowest score first; equal scores still resolve to the lower index.
    const auto scores = chunk_means(map.chi.data(), grid);
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  }
  std::vector<DeletionPoint> curve;
  const double m = static_cast<double>(grid.size());
  for (double f : fractions) {
    const auto count = std::min(grid.size(), static_cast<std::size_t>(std::ceil(f * m - 1e-9)));
    SelectionVector keep(grid.size(), true);
    for (std::size_t i = 0; i < count; ++i) keep.set(ranked[i], false);
    curve.push_back({f, evaluate_one(predictor, apply_mask(x, keep, grid))});
  }
  return curve;
}

EvalReport run_task_eval(const TwoClassTask& task, const TaskEvalConfig& config) {
  if (task.data.empty()) fail(ErrorKind::kEmptyInput, "empty dataset");
  const auto truth = check_labels(*task.classifier, task.data);
  const std::size_t repeats = std::max<std::size_t>(config.repeats, 1);

  std::vector<double> full_times, mask_times;
  std::vector<std::size_t> full_pred, mask_pred;
  std::vector<double> deletion_sum(config.fractions.size(), 0.0);

  for (std::size_t rep = 0; rep < repeats; ++rep) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> fp;
    for (const auto& inst : task.data) fp.push_back(task.classifier->predict(inst.x));
    full_times.push_back(seconds_since(t0));

    t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> mp;
    for (std::size_t i = 0; i < task.data.size(); ++i) {
      const auto& inst = task.data[i];
      ClassifierPredictor predictor(task.classifier, inst.label);
      SamplerConfig sc = config.sampler;
      sc.seed = mix64(config.sampler.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
      const Explanation ex = explain(predictor, inst.x, task.grid, sc);
      const SelectionVector mask = threshold_mask(ex.map, task.grid, config.mask_percentile);
      mp.push_back(task.classifier->predict(apply_mask(inst.x, mask, task.grid)));
      if (rep == 0 && !config.fractions.empty()) {
        const auto curve = deletion_faithfulness(ex.map, inst.x, task.grid, predictor, config.fractions);
        for (std::size_t k = 0; k < curve.size(); ++k) deletion_sum[k] += curve[k].loss;
      }
    }
    mask_times.push_back(seconds_since(t0));
    if (rep == 0) {
      full_pred = std::move(fp);
      mask_pred = std::move(mp);
    }
  }

  EvalReport report;
  const auto ft = mean_sd(full_times), mt = mean_sd(mask_times);
  report.conditions.push_back({"full", classification_metrics(truth, full_pred), ft.mean, ft.sd});
  report.conditions.push_back({"mupax_mask", classification_metrics(truth, mask_pred), mt.mean, mt.sd});
  for (std::size_t k = 0; k < config.fractions.size(); ++k) {
    report.deletion.push_back({config.fractions[k], deletion_sum[k] / static_cast<double>(task.data.size())});
  }
  return report;
}

double relevant_mass_share(const RealTensor& chi, const PlantedModelSpec& spec) {
  if (chi.shape() != spec.reference.shape()) fail(ErrorKind::kShapeMismatch, "saliency shape differs from planted model");
  const double total = chi.values().sum();
  if (!(total > 0.0)) return 0.0;
  double on_relevant = 0.0;
  for (std::size_t j : spec.relevant) {
    for (auto c : spec.grid.coordinates(j)) on_relevant += chi[c];
  }
  return on_relevant / total;
}

std::vector<SweepRow> run_sweep(const Predictor& predictor, const InputTensor& x, std::span<const Shape> chunks,
                                std::span<const std::uint64_t> n_targets, std::span<const double> percentiles,
                                const SamplerConfig& base, const PlantedModelSpec* planted) {
  std::vector<SweepRow> rows;
  for (const auto& chunk : chunks) {
    const ChunkGrid grid(x.shape(), chunk);
    for (auto n : n_targets) {
      for (double p : percentiles) {
        SamplerConfig sc = base;
        sc.n_target = n;
        sc.percentile_w = p;
        if (base.n_total_cap != 0) sc.n_total_cap = std::max(base.n_total_cap, n);
        const auto t0 = std::chrono::steady_clock::now();
        const Explanation ex = explain(predictor, x, grid, sc);
        SweepRow row;
        row.seconds = seconds_since(t0);
        row.chunk = chunk;
        row.n_target = n;
        row.percentile_w = p;
        row.w = ex.threshold.w;
        row.p_hat = ex.stats.p_hat();
        row.attempted = ex.stats.attempted;
        row.partial = ex.partial;
        row.relevant_share = planted ? relevant_mass_share(ex.map.chi, *planted) : std::nan("");
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

namespace {

std::string shape_string(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

}  // namespace

std::string sweep_table(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "chunk\tn_target\tpercentile_w\tW\tp_hat\tattempted\trelevant_share\tseconds\tpartial\n";
  for (const auto& r : rows) {
    os << shape_string(r.chunk) << '\t' << r.n_target << '\t' << r.percentile_w << '\t' << r.w << '\t' << r.p_hat
       << '\t' << r.attempted << '\t' << r.relevant_share << '\t' << r.seconds << '\t' << (r.partial ? "yes" : "no")
       << '\n';
  }
  return os.str();
}

nlohmann::json sweep_json(std::span<const SweepRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"chunk", r.chunk},
                   {"n_target", r.n_target},
                   {"percentile_w", r.percentile_w},
                   {"w", r.w},
                   {"p_hat", r.p_hat},
                   {"attempted", r.attempted},
                   {"relevant_share", std::isnan(r.relevant_share) ? nlohmann::json(nullptr) : nlohmann::json(r.relevant_share)},
                   {"seconds", r.seconds},
                   {"partial", r.partial}});
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : conditions) {
    conds.push_back({{"condition", c.name},
                     {"metrics", metrics_json(c.metrics)},
                     {"runtime_seconds", {{"mean", c.runtime_mean}, {"sd", c.runtime_sd}}}});
  }
  nlohmann::json del = nlohmann::json::array();
  for (const auto& p : deletion) del.push_back({{"fraction", p.fraction}, {"mean_loss", p.loss}});
  return {{"conditions", std::move(conds)}, {"deletion_curve", std::move(del)}};
}

std::string EvalReport::deletion_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "fraction,mean_loss\n";
  for (const auto& p : deletion) os << p.fraction << ',' << p.loss << '\n';
  return os.str();
}

}  // namespace mupax
