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

// mupax: command-line front end.
//
//   mupax synth        --shape 16 --relevant 2 --out dir
//   mupax attribute    --input x.mpxt --predictor planted:dir/planted.json --chunk 1 --out run
//   mupax oracle       (same flags; --w or calibrated W)
//   mupax crosscheck   --oracle run/oracle.mpxs --mc run/saliency.mpxs
//   mupax eval         --instances 40 --repeats 5 --out eval
//   mupax sweep        --chunks "4;2;1" --samples-list 1000 --percentiles 20,50 ...
//   mupax bridge-check --endpoint 127.0.0.1:7341 --echo
//
// Settings resolve as flags > --config file > defaults. Exit codes: 0 ok,
// 2 usage/IO, 3 budget exhausted (partial outputs), 4 mismatch, 5 protocol.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mupax/attribution.hpp"
#include "mupax/bridge/client.hpp"
#include "mupax/distribution.hpp"
#include "mupax/eval.hpp"
#include "mupax/oracle.hpp"
#include "mupax/registry.hpp"
#include "mupax/saliency_io.hpp"
#include "mupax/synthetic.hpp"
#include "mupax/tensor_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kBudget = 3,
  kMismatch = 4,
  kProtocol = 5,
};

int exit_code_for(mupax::ErrorKind kind) {
  using mupax::ErrorKind;
  switch (kind) {
    case ErrorKind::kBudgetExhausted:
      return kBudget;
    case ErrorKind::kConfigMismatch:
    case ErrorKind::kShapeMismatch:
    case ErrorKind::kLabelMismatch:
      return kMismatch;
    case ErrorKind::kProtocolError:
    case ErrorKind::kConnectionLost:
    case ErrorKind::kServerError:
    case ErrorKind::kTimeout:
      return kProtocol;
    default:
      return kUsage;
  }
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

// Option value types; flags arrive as strings and are converted here so the
// same keys can come from a JSON config file.
enum class Kind { kString, kUint, kReal, kShape, kShapeList, kUintList, kRealList, kBool };

struct OptionSpec {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
};

// Keys shared by the sampling commands.
const std::vector<OptionSpec> kSamplingOptions{
    {"--input", "input", Kind::kString, "input tensor (MPXT)"},
    {"--predictor", "predictor", Kind::kString, "planted:<json> | landmark:<json> | echo | bridge:<host:port>"},
    {"--chunk", "chunk", Kind::kShape, "chunk shape, e.g. 8x8"},
    {"--samples", "samples", Kind::kUint, "accepted samples n"},
    {"--calibration", "calibration", Kind::kUint, "calibration draws for W"},
    {"--percentile-w", "percentile_w", Kind::kReal, "calibration percentile for W"},
    {"--w", "w", Kind::kReal, "explicit threshold W (skips calibration)"},
    {"--cap", "cap", Kind::kUint, "rejection-phase draw budget (0 = 100 * samples)"},
    {"--mask-percentile", "mask_percentile", Kind::kReal, "percentile for the thresholded mask"},
    {"--seed", "seed", Kind::kUint, "RNG seed"},
    {"--workers", "workers", Kind::kUint, "worker threads"},
    {"--batch", "batch", Kind::kUint, "predictor batch size"},
    {"--out", "out", Kind::kString, "output directory"},
};

json defaults() {
  return {{"predictor", "echo"},  {"samples", 1000},        {"calibration", 256}, {"percentile_w", 20.0},
          {"cap", 0},             {"mask_percentile", 50.0}, {"seed", 0},          {"workers", 1},
          {"batch", 32},          {"out", "mupax_out"},      {"repeats", 5},       {"instances", 40},
          {"k", 4.0},             {"echo", false},           {"relevant", 2},      {"noise", 0},
          {"epsilon", 0.0},       {"value_lo", 0.1},         {"value_hi", 1.0},    {"percentiles", {20.0}},
          {"keep_samples", false}};
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-') mupax::fail(mupax::ErrorKind::kInvalidConfig, "not an unsigned integer: " + s);
  return v;
}

double parse_real(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) mupax::fail(mupax::ErrorKind::kInvalidConfig, "not a number: " + s);
  return v;
}

json parse_shape(const std::string& s) {
  json arr = json::array();
  for (const auto& part : split(s, "x,")) arr.push_back(parse_uint(part));
  if (arr.empty()) mupax::fail(mupax::ErrorKind::kInvalidConfig, "empty shape: " + s);
  return arr;
}

json convert(Kind kind, const std::string& raw) {
  switch (kind) {
    case Kind::kString:
      return raw;
    case Kind::kUint:
      return parse_uint(raw);
    case Kind::kReal: {
      const double v = parse_real(raw);
      return std::isinf(v) ? json("inf") : json(v);
    }
    case Kind::kShape:
      return parse_shape(raw);
    case Kind::kShapeList: {
      json arr = json::array();
      for (const auto& part : split(raw, ";")) arr.push_back(parse_shape(part));
      return arr;
    }
    case Kind::kUintList: {
      json arr = json::array();
      for (const auto& part : split(raw, ",")) arr.push_back(parse_uint(part));
      return arr;
    }
    case Kind::kRealList: {
      json arr = json::array();
      for (const auto& part : split(raw, ",")) arr.push_back(parse_real(part));
      return arr;
    }
    case Kind::kBool:
      return raw == "true";
  }
  return nullptr;
}

const char* type_name(Kind kind) {
  switch (kind) {
    case Kind::kUint:
      return "UINT";
    case Kind::kReal:
      return "REAL";
    case Kind::kShape:
      return "SHAPE";
    case Kind::kShapeList:
      return "SHAPE;...";
    case Kind::kUintList:
      return "UINT,...";
    case Kind::kRealList:
      return "REAL,...";
    default:
      return "TEXT";
  }
}

// A subcommand with its string-typed option storage.
struct Command {
  CLI::App* app = nullptr;
  std::vector<OptionSpec> specs;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;

  void add(const OptionSpec& spec) {
    specs.push_back(spec);
    if (spec.kind == Kind::kBool) {
      options[spec.key] = app->add_flag(spec.flag, spec.help);
    } else {
      options[spec.key] = app->add_option(spec.flag, values[spec.key], spec.help)->type_name(type_name(spec.kind));
    }
  }

  /// defaults <- config file <- flags
  json resolve() const {
    json cfg = defaults();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) mupax::fail(mupax::ErrorKind::kNotFound, "cannot open config " + config_path);
      json file;
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        mupax::fail(mupax::ErrorKind::kInvalidConfig, config_path + ": " + e.what());
      }
      if (file.contains("config")) file = file["config"];  // a manifest
      for (auto& [k, v] : file.items()) {
        if (v.is_string() && (k == "chunk" || k == "shape")) {
          cfg[k] = parse_shape(v.get<std::string>());
        } else {
          cfg[k] = v;
        }
      }
    }
    for (const auto& spec : specs) {
      const auto* opt = options.at(spec.key);
      if (opt->count() == 0) continue;
      cfg[spec.key] = spec.kind == Kind::kBool ? json(true) : convert(spec.kind, values.at(spec.key));
    }
    return cfg;
  }
};

template <typename T>
T get(const json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg[key].is_null()) mupax::fail(mupax::ErrorKind::kInvalidConfig, std::string("missing --") + key);
  try {
    return cfg[key].get<T>();
  } catch (const json::exception& e) {
    mupax::fail(mupax::ErrorKind::kInvalidConfig, std::string("bad value for ") + key + ": " + e.what());
  }
}

std::optional<double> get_w(const json& cfg) {
  if (!cfg.contains("w") || cfg["w"].is_null()) return std::nullopt;
  return mupax::real_from_json(cfg["w"]);
}

mupax::SamplerConfig sampler_from(const json& cfg) {
  mupax::SamplerConfig sc;
  sc.n_target = get<std::uint64_t>(cfg, "samples");
  sc.n_calibration = get<std::uint64_t>(cfg, "calibration");
  sc.percentile_w = get<double>(cfg, "percentile_w");
  sc.n_total_cap = get<std::uint64_t>(cfg, "cap");
  sc.seed = get<std::uint64_t>(cfg, "seed");
  sc.workers = get<std::size_t>(cfg, "workers");
  sc.batch_size = get<std::size_t>(cfg, "batch");
  sc.validate();
  return sc;
}

fs::path prepare_out(const json& cfg) {
  const fs::path out = get<std::string>(cfg, "out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) mupax::fail(mupax::ErrorKind::kIo, "cannot create " + out.string() + ": " + ec.message());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) mupax::fail(mupax::ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_manifest(const fs::path& dir, const std::string& command, const json& cfg) {
  write_json(dir / "manifest.json",
             {{"command", command},
              {"config", cfg},
              {"versions",
               {{"mupax", kVersion},
                {"mpxt", mupax::kTensorFormatVersion},
                {"mpxs", mupax::kSaliencyFormatVersion},
                {"protocol", mupax::bridge::kProtocolVersion},
                {"distribution", std::string(mupax::StratifiedUniform::kName)}}}});
}

struct Loaded {
  mupax::InputTensor x;
  mupax::ChunkGrid grid;
  mupax::PredictorHandle handle;
};

Loaded load_problem(const json& cfg) {
  auto x = mupax::load_tensor(get<std::string>(cfg, "input"));
  const auto chunk = get<mupax::Shape>(cfg, "chunk");
  mupax::ChunkGrid grid(x.shape(), chunk);
  auto handle = mupax::make_predictor(get<std::string>(cfg, "predictor"), x, chunk,
                                      std::max<std::size_t>(1, get<std::size_t>(cfg, "workers")));
  return {std::move(x), std::move(grid), std::move(handle)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json stats_json(const mupax::Explanation& e, double seconds) {
  return {{"n", e.map.n},
          {"w", mupax::json_real(e.threshold.w)},
          {"w_source", e.threshold.source == mupax::ThresholdW::Source::kCalibrated ? "calibrated" : "explicit"},
          {"p_hat", e.stats.p_hat()},
          {"attempted", e.stats.attempted},
          {"accepted", e.stats.accepted},
          {"evaluations", e.stats.evaluations},
          {"partial", e.partial},
          {"wall_seconds", seconds}};
}

int cmd_attribute(const json& cfg) {
  const auto sc = sampler_from(cfg);
  auto p = load_problem(cfg);
  const auto out = prepare_out(cfg);
  write_manifest(out, "attribute", cfg);
  const bool keep = get<bool>(cfg, "keep_samples");

  const auto t0 = std::chrono::steady_clock::now();
  const auto e = mupax::explain(*p.handle.predictor, p.x, p.grid, sc, get_w(cfg), keep);
  const double secs = seconds_since(t0);

  mupax::save_saliency((out / "saliency.mpxs").string(), e.map);
  write_json(out / "decomposition.json", mupax::decomposition_json(e.decomposition, p.grid));
  json run = stats_json(e, secs);
  run["mask"] = mupax::threshold_mask(e.map, p.grid, get<double>(cfg, "mask_percentile")).to_string();
  run["mask_percentile"] = get<double>(cfg, "mask_percentile");
  if (p.handle.planted) run["relevant_share"] = mupax::relevant_mass_share(e.map.chi, *p.handle.planted);
  write_json(out / "run.json", run);
  if (keep) {
    std::ofstream s(out / "samples.tsv");
    s << "index\tselection\tmu\n";
    s.precision(17);
    for (const auto& a : e.samples) s << a.index << '\t' << a.selection.to_string() << '\t' << a.mu << '\n';
  }
  std::cout << run.dump() << std::endl;
  if (e.partial) {
    print_error("BudgetExhausted", "accepted " + std::to_string(e.stats.accepted) + " of " +
                                       std::to_string(sc.n_target) + " samples; outputs are partial");
    return kBudget;
  }
  return kOk;
}

int cmd_oracle(const json& cfg) {
  const auto sc = sampler_from(cfg);
  auto p = load_problem(cfg);
  const auto out = prepare_out(cfg);
  write_manifest(out, "oracle", cfg);
  double w = 0.0;
  std::string source = "explicit";
  if (auto explicit_w = get_w(cfg)) {
    w = *explicit_w;
  } else {
    // Same calibration draws as `attribute` with this seed.
    w = mupax::calibrate_threshold(*p.handle.predictor, p.x, p.grid, sc).threshold.w;
    source = "calibrated";
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = mupax::enumerate(*p.handle.predictor, p.x, p.grid, w, sc.workers);
  mupax::save_saliency((out / "oracle.mpxs").string(), mupax::oracle_as_map(r));
  write_json(out / "mask_table.json", mupax::mask_table_json(r));
  json summary{{"m", r.m},
               {"w", mupax::json_real(w)},
               {"w_source", source},
               {"p_w", r.p_w},
               {"accepted_masks", r.accepted_masks},
               {"identity_residual", r.identity_residual},
               {"wall_seconds", seconds_since(t0)}};
  write_json(out / "oracle.json", summary);
  std::cout << summary.dump() << std::endl;
  return kOk;
}

int cmd_crosscheck(const json& cfg) {
  const auto exact = mupax::load_saliency(get<std::string>(cfg, "oracle"));
  const auto mc_file = mupax::load_saliency(get<std::string>(cfg, "mc"));
  mupax::SaliencyMap mc{mc_file.chi.cast<double>(), mc_file.se.cast<double>(), mc_file.n, mc_file.w, mc_file.p_hat};
  // MPXS stores 32-bit reals, so allow float rounding on top of k * se.
  const auto rep = mupax::crosscheck(exact.chi.cast<double>(), exact.w, mc, get<double>(cfg, "k"), 1e-6);
  json j{{"max_abs_error", rep.max_abs_error}, {"mean_abs_error", rep.mean_abs_error},
         {"rmse", rep.rmse},                   {"mean_se", rep.mean_se},
         {"coverage", rep.coverage},           {"k", rep.k},
         {"mae_over_mean_se", rep.mean_se > 0 ? rep.mean_abs_error / rep.mean_se : 0.0},
         {"p_w_oracle", exact.p_hat},          {"p_hat_mc", mc_file.p_hat}};
  if (cfg.contains("out") && cfg["out"] != defaults()["out"]) {
    const auto out = prepare_out(cfg);
    write_manifest(out, "crosscheck", cfg);
    write_json(out / "crosscheck.json", j);
  }
  std::cout << j.dump() << std::endl;
  return kOk;
}

int cmd_eval(const json& cfg) {
  const auto out = prepare_out(cfg);
  write_manifest(out, "eval", cfg);
  mupax::TwoClassTaskConfig tc;
  tc.instances = get<std::size_t>(cfg, "instances");
  if (cfg.contains("shape")) tc.shape = get<mupax::Shape>(cfg, "shape");
  if (cfg.contains("chunk")) tc.chunk = get<mupax::Shape>(cfg, "chunk");
  const auto task = mupax::make_two_class_task(tc, get<std::uint64_t>(cfg, "seed"));
  mupax::TaskEvalConfig ec;
  ec.sampler = sampler_from(cfg);
  ec.mask_percentile = get<double>(cfg, "mask_percentile");
  ec.repeats = get<std::size_t>(cfg, "repeats");
  if (cfg.contains("fractions")) ec.fractions = get<std::vector<double>>(cfg, "fractions");
  const auto rep = mupax::run_task_eval(task, ec);
  const json j = rep.to_json();
  write_json(out / "eval_report.json", j);
  std::ofstream(out / "deletion.csv") << rep.deletion_csv();
  std::cout << j.dump() << std::endl;
  return kOk;
}

int cmd_sweep(const json& cfg) {
  const auto base = sampler_from(cfg);
  auto x = mupax::load_tensor(get<std::string>(cfg, "input"));
  const auto chunks = get<std::vector<mupax::Shape>>(cfg, "chunks");
  if (chunks.empty()) mupax::fail(mupax::ErrorKind::kInvalidConfig, "--chunks needs at least one shape");
  const auto ns = cfg.contains("samples_list") ? get<std::vector<std::uint64_t>>(cfg, "samples_list")
                                                : std::vector<std::uint64_t>{base.n_target};
  const auto ps = get<std::vector<double>>(cfg, "percentiles");
  // The planted model's own grid comes from its spec (or the first chunk).
  auto handle = mupax::make_predictor(get<std::string>(cfg, "predictor"), x, chunks.front(),
                                      std::max<std::size_t>(1, base.workers));
  const auto out = prepare_out(cfg);
  write_manifest(out, "sweep", cfg);
  const auto rows = mupax::run_sweep(*handle.predictor, x, chunks, ns, ps, base,
                                     handle.planted ? &*handle.planted : nullptr);
  const std::string table = mupax::sweep_table(rows);
  std::ofstream(out / "sweep.tsv") << table;
  write_json(out / "sweep.json", mupax::sweep_json(rows));
  std::cout << table;
  return kOk;
}

int cmd_bridge_check(const json& cfg) {
  const auto ep = mupax::bridge::Endpoint::parse(get<std::string>(cfg, "endpoint"));
  const auto rep = mupax::bridge::check_conformance(ep, get<bool>(cfg, "echo"));
  std::cout << rep.to_json().dump() << std::endl;
  return rep.conformant() ? kOk : kProtocol;
}

int cmd_synth(const json& cfg) {
  const auto out = prepare_out(cfg);
  write_manifest(out, "synth", cfg);
  mupax::PlantedInstanceConfig pc;
  pc.shape = get<mupax::Shape>(cfg, "shape");
  pc.chunk = cfg.contains("chunk") ? get<mupax::Shape>(cfg, "chunk") : mupax::Shape(pc.shape.size(), 1);
  pc.relevant = get<std::size_t>(cfg, "relevant");
  pc.noise = get<std::size_t>(cfg, "noise");
  pc.epsilon = get<double>(cfg, "epsilon");
  pc.value_lo = static_cast<float>(get<double>(cfg, "value_lo"));
  pc.value_hi = static_cast<float>(get<double>(cfg, "value_hi"));
  const auto spec = mupax::make_planted_instance(pc, get<std::uint64_t>(cfg, "seed"));
  mupax::save_tensor((out / "input.mpxt").string(), spec.reference);
  json j = mupax::planted_spec_to_json(spec);
  j["reference"] = "input.mpxt";
  if (cfg.contains("spin_us")) j["spin_us"] = cfg["spin_us"];
  if (cfg.contains("sleep_us")) j["sleep_us"] = cfg["sleep_us"];
  write_json(out / "planted.json", j);
  std::cout << json{{"input", (out / "input.mpxt").string()}, {"planted", (out / "planted.json").string()},
                    {"relevant", spec.relevant}, {"noise", spec.noise}}
                   .dump()
            << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mupax: perturbation attribution by rejection sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::map<std::string, Command> commands;
  std::map<std::string, int (*)(const json&)> handlers{
      {"attribute", cmd_attribute}, {"oracle", cmd_oracle}, {"crosscheck", cmd_crosscheck},
      {"eval", cmd_eval},           {"sweep", cmd_sweep},   {"bridge-check", cmd_bridge_check},
      {"synth", cmd_synth}};
  const std::map<std::string, std::string> about{
      {"attribute", "explain one input: calibrate, sample, accumulate, write MPXS"},
      {"oracle", "exact chi by enumerating every selection vector (m <= 20)"},
      {"crosscheck", "compare a Monte Carlo MPXS against an oracle MPXS"},
      {"eval", "masked-task metrics and deletion curve on the synthetic two-class task"},
      {"sweep", "chunk x samples x percentile grid on one input"},
      {"bridge-check", "golden-frame conformance against a live bridge server"},
      {"synth", "write a planted instance (input.mpxt + planted.json)"}};

  for (const auto& [name, _] : handlers) {
    auto& c = commands[name];
    c.app = app.add_subcommand(name, about.at(name));
    c.app->add_option("--config", c.config_path, "JSON config or manifest (flags override it)");
  }
  for (const char* name : {"attribute", "oracle"}) {
    for (const auto& spec : kSamplingOptions) commands[name].add(spec);
  }
  commands["attribute"].add({"--keep-samples", "keep_samples", Kind::kBool, "write accepted samples to samples.tsv"});
  auto& cc = commands["crosscheck"];
  cc.add({"--oracle", "oracle", Kind::kString, "oracle MPXS"});
  cc.add({"--mc", "mc", Kind::kString, "Monte Carlo MPXS"});
  cc.add({"--k", "k", Kind::kReal, "coverage multiple of se"});
  cc.add({"--out", "out", Kind::kString, "output directory"});
  auto& ev = commands["eval"];
  for (const auto& spec : kSamplingOptions) {
    if (std::string(spec.key) != "input" && std::string(spec.key) != "predictor" && std::string(spec.key) != "w") ev.add(spec);
  }
  ev.add({"--repeats", "repeats", Kind::kUint, "timing repeats"});
  ev.add({"--instances", "instances", Kind::kUint, "dataset size"});
  ev.add({"--shape", "shape", Kind::kShape, "input shape"});
  ev.add({"--fractions", "fractions", Kind::kRealList, "deletion fractions, e.g. 0.05,0.1"});
  auto& sw = commands["sweep"];
  for (const auto& spec : kSamplingOptions) {
    if (std::string(spec.key) != "chunk" && std::string(spec.key) != "w") sw.add(spec);
  }
  sw.add({"--chunks", "chunks", Kind::kShapeList, "chunk shapes separated by ';', e.g. \"4x4;2x2\""});
  sw.add({"--samples-list", "samples_list", Kind::kUintList, "n values, e.g. 100,1000"});
  sw.add({"--percentiles", "percentiles", Kind::kRealList, "W percentiles, e.g. 20,50"});
  auto& bc = commands["bridge-check"];
  bc.add({"--endpoint", "endpoint", Kind::kString, "host:port"});
  bc.add({"--echo", "echo", Kind::kBool, "server is in echo mode (loss = sum of values)"});
  auto& sy = commands["synth"];
  sy.add({"--shape", "shape", Kind::kShape, "input shape"});
  sy.add({"--chunk", "chunk", Kind::kShape, "planted grid chunk shape (default all ones)"});
  sy.add({"--relevant", "relevant", Kind::kUint, "|S*|"});
  sy.add({"--noise", "noise", Kind::kUint, "noise chunk count"});
  sy.add({"--epsilon", "epsilon", Kind::kReal, "noise weight"});
  sy.add({"--value-lo", "value_lo", Kind::kReal, "smallest reference value"});
  sy.add({"--value-hi", "value_hi", Kind::kReal, "largest reference value"});
  sy.add({"--spin-us", "spin_us", Kind::kUint, "busy-wait per evaluation"});
  sy.add({"--sleep-us", "sleep_us", Kind::kUint, "sleep per evaluation"});
  sy.add({"--seed", "seed", Kind::kUint, "RNG seed"});
  sy.add({"--out", "out", Kind::kString, "output directory"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return kUsage;
  }

  for (auto& [name, c] : commands) {
    if (!c.app->parsed()) continue;
    try {
      return handlers.at(name)(c.resolve());
    } catch (const mupax::Error& e) {
      print_error(std::string(mupax::to_string(e.kind())), e.detail());
      return exit_code_for(e.kind());
    } catch (const std::exception& e) {
      print_error("InternalError", e.what());
      return kInternal;
    }
  }
  return kUsage;
}
