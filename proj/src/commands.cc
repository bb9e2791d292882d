// Copyright 2026 The Clipbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clipbound/commands.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "clipbound/errors.h"
#include "clipbound/metrics.h"

#ifndef CLIPBOUND_VERSION
#define CLIPBOUND_VERSION "0.0.0"
#endif

namespace clipbound {

using nlohmann::json;

std::string VersionString() { return "clipbound " CLIPBOUND_VERSION; }

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void WriteHistoryCsv(std::ostream& out, const std::vector<HistoryRow>& rows) {
  out << kHistoryHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << FormatDouble(r.loss) << ','
        << FormatDouble(r.clip_bound) << ',';
    if (r.noisy_clip_fraction) out << FormatDouble(*r.noisy_clip_fraction);
    out << ',' << FormatDouble(r.grad_norm_p50) << ','
        << FormatDouble(r.grad_norm_p90) << ','
        << FormatDouble(r.grad_norm_max) << '\n';
  }
}

namespace {

std::ofstream OpenOut(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

}  // namespace

void WriteHistoryCsv(const std::filesystem::path& path,
                     const std::vector<HistoryRow>& rows) {
  auto out = OpenOut(path);
  WriteHistoryCsv(out, rows);
}

void WriteJson(const std::filesystem::path& path, const json& j) {
  auto out = OpenOut(path);
  out << j.dump(2) << '\n';
}

// --- Data ------------------------------------------------------------------

namespace {

// Random disjoint split; both parts keep the original row order.
std::pair<Dataset, Dataset> HoldOut(const Dataset& ds, double fraction,
                                    Rng& rng) {
  std::vector<Index> idx(ds.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  const auto held = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(ds.size())));
  std::vector<Index> out(idx.begin(), idx.begin() + held);
  std::vector<Index> keep(idx.begin() + held, idx.end());
  std::sort(out.begin(), out.end());
  std::sort(keep.begin(), keep.end());
  return {ds.Select(keep), ds.Select(out)};
}

std::pair<CsvTable, CsvTable> HoldOutRows(const CsvTable& t, double fraction,
                                          Rng& rng) {
  std::vector<std::size_t> idx(t.rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  const auto held = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(t.rows.size())));
  std::vector<bool> is_held(t.rows.size(), false);
  for (std::size_t i = 0; i < held; ++i) is_held[idx[i]] = true;
  CsvTable keep{t.header, {}};
  CsvTable out{t.header, {}};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    (is_held[i] ? out : keep).rows.push_back(t.rows[i]);
  }
  return {std::move(keep), std::move(out)};
}

}  // namespace

DataSplits LoadData(const DatasetConfig& c) {
  Rng rng(c.data_seed);
  DataSplits s;
  if (c.kind == "bimodal") {
    Rng gen = rng.Split("bimodal");
    s.train = GenBimodal(c.n, c.p_major, c.mode_lo, c.mode_hi, c.jitter_std,
                         gen);
    s.test = s.train;
  } else if (c.kind == "skewed_synthetic") {
    Rng mean_rng = rng.Split("means");
    const Matrix means =
        BlobMeans(c.num_classes, c.cluster_separation, c.dim, mean_rng);
    Rng train_rng = rng.Split("train");
    Dataset balanced = GenBlobs(c.n_per_class, means, train_rng);
    const int minority = c.minority_class.value_or(
        c.num_classes > 8 ? 8 : c.num_classes - 1);
    Rng skew_rng = rng.Split("skew");
    s.train = SkewClass(balanced, minority, c.keep_fraction, skew_rng);
    Rng test_rng = rng.Split("test");
    s.test = GenBlobs(c.test_per_class, means, test_rng);
  } else if (c.kind == "idx") {
    s.train = LoadIdx(c.Resolve(c.train_images), c.Resolve(c.train_labels));
    s.test = LoadIdx(c.Resolve(c.test_images), c.Resolve(c.test_labels));
    const int k = std::max(s.train.num_classes, s.test.num_classes);
    s.train.num_classes = s.test.num_classes = k;
    if (c.minority_class) {
      if (*c.minority_class >= k) {
        throw ParameterError("dataset: minority_class outside label range");
      }
      Rng skew_rng = rng.Split("skew");
      s.train = SkewClass(s.train, *c.minority_class, c.keep_fraction,
                          skew_rng);
    }
  } else if (c.kind == "adult" || c.kind == "dutch") {
    const TabularSchema schema =
        c.kind == "adult" ? AdultSchema() : DutchSchema();
    CsvTable train = ReadCsv(c.Resolve(c.train_csv));
    CsvTable test;
    if (!c.test_csv.empty()) {
      test = ReadCsv(c.Resolve(c.test_csv));
    } else {
      Rng split_rng = rng.Split("test-split");
      std::tie(train, test) = HoldOutRows(train, c.test_fraction, split_rng);
    }
    const TabularEncoder enc = TabularEncoder::Fit(train, schema);
    s.train = enc.Apply(train);
    s.test = enc.Apply(test);
    if (c.balance_groups) {
      Rng bal_rng = rng.Split("balance");
      s.train = BalanceByAttribute(s.train, bal_rng);
    }
  } else {
    throw ParameterError("dataset: unknown kind '" + c.kind + "'");
  }
  if (c.validation_fraction > 0.0) {
    Rng val_rng = rng.Split("validation");
    auto [rest, held] = HoldOut(s.train, c.validation_fraction, val_rng);
    s.train = std::move(rest);
    s.validation = std::move(held);
  }
  s.train.Validate();
  s.test.Validate();
  return s;
}

ModelSpec SpecFor(const ModelConfig& model, const Dataset& train) {
  ModelSpec spec;
  spec.kind = model.kind;
  spec.input_dim = train.dim();
  spec.num_classes = model.kind == ModelKind::kMean ? 2 : train.num_classes;
  spec.hidden = model.kind == ModelKind::kMlp ? model.hidden : 0;
  spec.Validate();
  return spec;
}

// --- Evaluation ------------------------------------------------------------

json Evaluation::ToJson() const {
  json j;
  j["macro_acc"] = macro_acc;
  j["micro_acc"] = micro_acc;
  j["worst_acc"] = worst_acc;
  j["worst_class"] = worst_class;
  if (!group_acc.empty()) j["group_acc"] = group_acc;
  return j;
}

Evaluation Evaluate(const ModelState& state, const Dataset& data) {
  if (state.spec.kind == ModelKind::kMean) {
    throw ParameterError("evaluate: the mean model has no class predictions");
  }
  const Predictions p = Predict(state, data.features);
  const int k = std::max(data.num_classes, state.spec.num_classes);
  const ConfusionCounts counts = CountConfusion(p.labels, data.labels, k);
  Evaluation e;
  e.macro_acc = MacroAccuracy(counts);
  e.micro_acc = MicroAccuracy(counts);
  const WorstClass w = WorstClassAccuracy(counts);
  e.worst_acc = w.accuracy;
  e.worst_class = w.class_index;
  if (data.has_groups()) {
    e.group_acc = GroupAccuracy(p.labels, data.labels, data.groups,
                                data.num_groups);
  }
  return e;
}

// --- Runs ------------------------------------------------------------------

RunPlan DefaultPlan(const RunConfig& config, std::uint64_t seed) {
  RunPlan p;
  p.strategy = config.training.strategy;
  p.clip_param = config.training.clip_param;
  p.learning_rate = config.training.base.learning_rate;
  p.batch_size = config.training.batch_size;
  p.seed = seed;
  return p;
}

TrainConfig ResolveTrainConfig(const RunConfig& config, const RunPlan& plan,
                               Index n) {
  TrainConfig t = config.training.base;
  const ClippingConfig& base = config.training.base.clipping;
  t.learning_rate = plan.learning_rate;
  t.seed = plan.seed;
  t.delta = config.privacy.delta;
  if (plan.batch_size) {
    t.sampling_rate = std::min(
        1.0, static_cast<double>(*plan.batch_size) / static_cast<double>(n));
  }
  t.clipping = ClippingConfig::ForStrategy(plan.strategy, plan.clip_param);
  t.clipping.target_quantile = base.target_quantile;
  t.clipping.threshold_multiplier = base.threshold_multiplier;
  t.clipping.bound_learning_rate = base.bound_learning_rate;
  if (plan.strategy == ClippingStrategy::kBounded) {
    t.clipping.initial_bound = std::max(base.initial_bound, plan.clip_param);
  }
  const bool adaptive = t.clipping.mode == ClippingMode::kAdaptive;
  const double ratio = adaptive ? config.privacy.count_ratio : 0.0;

  if (t.noiseless) {
    t.sigma_grad = 0.0;
    t.sigma_count = 0.0;
  } else if (config.privacy.target_epsilon) {
    t.sigma_grad =
        CalibrateSigma(*config.privacy.target_epsilon, t.delta,
                       t.sampling_rate, t.ResolvedSteps(), ratio);
    t.sigma_count = ratio * t.sigma_grad;
  } else if (config.privacy.sigma_grad) {
    t.sigma_grad = *config.privacy.sigma_grad;
    t.sigma_count = ratio * t.sigma_grad;
  } else {
    throw ParameterError(
        "config: training is not noiseless but no privacy block gives "
        "target_epsilon or sigma_grad");
  }
  t.Validate();
  return t;
}

SeedOutcome RunPlanOnce(const RunConfig& config, const RunPlan& plan,
                        const Dataset& train, const Dataset& eval_on) {
  SeedOutcome out;
  out.train_config = ResolveTrainConfig(config, plan, train.size());
  const ModelSpec spec = SpecFor(config.model, train);
  Rng rng(plan.seed);
  out.run = Train(out.train_config, train, spec, rng);
  out.eval = Evaluate(out.run.final_state, eval_on);
  return out;
}

namespace {

json OptionalEpsilon(const RunResult& run) {
  return run.epsilon ? json(run.epsilon->epsilon) : json(nullptr);
}

json SigmaCount(const TrainConfig& t) {
  return t.clipping.mode == ClippingMode::kAdaptive ? json(t.sigma_count)
                                                    : json(nullptr);
}

}  // namespace

json RunManifest(const RunConfig& config, const SeedOutcome& out) {
  const TrainConfig& t = out.train_config;
  json m;
  m["config"] = config.raw;
  m["seeds"] = json::array({t.seed});
  m["epsilon"] = OptionalEpsilon(out.run);
  m["opt_order"] =
      out.run.epsilon ? json(out.run.epsilon->order) : json(nullptr);
  m["accountant"] = kAccountantName;
  m["delta"] = t.delta;
  m["sigma_grad"] = t.sigma_grad;
  m["sigma_count"] = SigmaCount(t);
  m["steps"] = t.ResolvedSteps();
  m["sampling_rate"] = t.sampling_rate;
  m["method"] = ToString(config.training.strategy);
  m["metrics"] = out.eval.ToJson();
  m["final_clip_bound"] = out.run.final_clip_bound;
  m["non_private_flags"] = out.run.non_private_flags;
  m["version"] = VersionString();
  return m;
}

// --- toy -------------------------------------------------------------------

json ToySummary::ToJson() const {
  json j;
  json modes_json = json::object();
  for (const auto& m : modes) {
    modes_json[ToString(m.strategy)] = {
        {"final_estimate", m.final_estimate},
        {"final_clip_bound", m.final_clip_bound},
        {"steps", m.history.size()}};
  }
  j["modes"] = modes_json;
  return j;
}

ToySummary CmdToy(const RunConfig& config, bool write_outputs) {
  if (config.dataset.kind != "bimodal") {
    throw ParameterError("toy: dataset.kind must be 'bimodal'");
  }
  if (config.raw.contains("model") &&
      config.model.kind != ModelKind::kMean) {
    throw ParameterError("toy: model.kind must be 'mean'");
  }
  if (!config.training.base.noiseless && !config.has_privacy()) {
    throw ParameterError(
        "toy: noise requested (noiseless = false) but the privacy block "
        "sets neither target_epsilon nor sigma_grad");
  }
  const DataSplits data = LoadData(config.dataset);
  RunConfig rc = config;
  rc.model.kind = ModelKind::kMean;
  rc.training.base.clipping.initial_bound = config.toy.initial_bound;
  const ModelSpec spec = SpecFor(rc.model, data.train);
  const std::uint64_t seed = config.seeds.front();

  const std::vector<std::pair<ClippingStrategy, double>> modes = {
      {ClippingStrategy::kUnbounded, config.toy.initial_bound},
      {ClippingStrategy::kBounded, config.toy.lower_bound},
      {ClippingStrategy::kConstant, config.toy.constant_bound}};

  ToySummary summary;
  json manifest;
  json per_mode = json::object();
  std::optional<double> max_eps;
  std::set<std::string> flags;
  Index steps = 0;
  double q = 0.0;
  for (const auto& [strategy, clip] : modes) {
    RunPlan plan = DefaultPlan(rc, seed);
    plan.strategy = strategy;
    plan.clip_param = clip;
    plan.batch_size = std::nullopt;
    const TrainConfig t = ResolveTrainConfig(rc, plan, data.train.size());
    Rng rng(seed);
    RunResult run = Train(t, data.train, spec, rng);

    ToyModeResult r;
    r.strategy = strategy;
    r.final_estimate = run.final_state.params[0];
    r.final_clip_bound = run.final_clip_bound;
    r.history = std::move(run.history);
    const std::string name = ToString(strategy);
    if (write_outputs) {
      WriteHistoryCsv(std::filesystem::path(config.output_dir) /
                          ("history_" + name + ".csv"),
                      r.history);
    }
    per_mode[name] = {{"sigma_grad", t.sigma_grad},
                      {"sigma_count", SigmaCount(t)},
                      {"epsilon", OptionalEpsilon(run)},
                      {"clip_param", clip}};
    if (run.epsilon) {
      max_eps = std::max(max_eps.value_or(0.0), run.epsilon->epsilon);
    }
    flags.insert(run.non_private_flags.begin(), run.non_private_flags.end());
    steps = t.ResolvedSteps();
    q = t.sampling_rate;
    summary.modes.push_back(std::move(r));
  }

  if (write_outputs) {
    json s = summary.ToJson();
    s["seed"] = seed;
    s["version"] = VersionString();
    WriteJson(std::filesystem::path(config.output_dir) / "summary.json", s);

    manifest["config"] = config.raw;
    manifest["seeds"] = json::array({seed});
    manifest["epsilon"] = max_eps ? json(*max_eps) : json(nullptr);
    manifest["delta"] = config.privacy.delta;
    manifest["sigma_grad"] = json::object();
    manifest["sigma_count"] = json::object();
    for (const auto& [name, v] : per_mode.items()) {
      manifest["sigma_grad"][name] = v["sigma_grad"];
      manifest["sigma_count"][name] = v["sigma_count"];
    }
    manifest["modes"] = per_mode;
    manifest["steps"] = steps;
    manifest["sampling_rate"] = q;
    manifest["metrics"] = summary.ToJson()["modes"];
    manifest["non_private_flags"] =
        std::vector<std::string>(flags.begin(), flags.end());
    manifest["accountant"] = kAccountantName;
    manifest["version"] = VersionString();
    WriteJson(std::filesystem::path(config.output_dir) / "manifest.json",
              manifest);
  }
  return summary;
}

// --- train -----------------------------------------------------------------

namespace {

json MeanAndSe(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {{"mean", mean}, {"se", sd / std::sqrt(n)}, {"values", v}};
}

}  // namespace

json CmdTrain(const RunConfig& config, bool* all_ok) {
  const DataSplits data = LoadData(config.dataset);
  const std::filesystem::path root(config.output_dir);
  std::map<std::string, std::vector<double>> metrics;
  std::vector<std::uint64_t> completed;
  json failed = json::array();
  std::optional<SeedOutcome> first;
  std::optional<double> max_eps;
  std::set<std::string> flags;

  for (const std::uint64_t seed : config.seeds) {
    const std::filesystem::path dir = root / ("seed_" + std::to_string(seed));
    const RunPlan plan = DefaultPlan(config, seed);
    try {
      SeedOutcome out = RunPlanOnce(config, plan, data.train, data.test);
      WriteHistoryCsv(dir / "history.csv", out.run.history);
      WriteJson(dir / "manifest.json", RunManifest(config, out));
      metrics["macro_acc"].push_back(out.eval.macro_acc);
      metrics["micro_acc"].push_back(out.eval.micro_acc);
      metrics["worst_acc"].push_back(out.eval.worst_acc);
      for (std::size_t g = 0; g < out.eval.group_acc.size(); ++g) {
        metrics["group_acc_" + std::to_string(g)].push_back(
            out.eval.group_acc[g]);
      }
      if (out.run.epsilon) {
        max_eps = std::max(max_eps.value_or(0.0), out.run.epsilon->epsilon);
      }
      flags.insert(out.run.non_private_flags.begin(),
                   out.run.non_private_flags.end());
      completed.push_back(seed);
      if (!first) first = std::move(out);
    } catch (const TrainingDiverged& e) {
      WriteHistoryCsv(dir / "history.csv", e.history());
      failed.push_back({{"seed", seed}, {"error", e.what()}});
    }
  }
  if (all_ok) *all_ok = failed.empty();

  json agg;
  agg["method"] = ToString(config.training.strategy);
  agg["target_epsilon"] = config.privacy.target_epsilon
                              ? json(*config.privacy.target_epsilon)
                              : json(nullptr);
  agg["epsilon"] = max_eps ? json(*max_eps) : json(nullptr);
  agg["seeds"] = completed;
  agg["n_seeds"] = completed.size();
  agg["metrics"] = json::object();
  for (const auto& [name, v] : metrics) agg["metrics"][name] = MeanAndSe(v);
  agg["failed"] = failed;
  agg["version"] = VersionString();
  WriteJson(root / "aggregate.json", agg);

  json m;
  m["config"] = config.raw;
  m["seeds"] = config.seeds;
  m["epsilon"] = agg["epsilon"];
  m["delta"] = config.privacy.delta;
  if (first) {
    const TrainConfig& t = first->train_config;
    m["sigma_grad"] = t.sigma_grad;
    m["sigma_count"] = SigmaCount(t);
    m["steps"] = t.ResolvedSteps();
    m["sampling_rate"] = t.sampling_rate;
    m["opt_order"] = first->run.epsilon ? json(first->run.epsilon->order)
                                        : json(nullptr);
  } else {
    m["sigma_grad"] = m["sigma_count"] = m["steps"] = m["sampling_rate"] =
        m["opt_order"] = nullptr;
  }
  m["metrics"] = json::object();
  for (const auto& [name, v] : agg["metrics"].items()) {
    m["metrics"][name] = v["mean"];
  }
  m["non_private_flags"] = std::vector<std::string>(flags.begin(), flags.end());
  m["accountant"] = kAccountantName;
  m["completed_seeds"] = completed;
  m["failed"] = failed;
  m["version"] = VersionString();
  WriteJson(root / "manifest.json", m);
  return agg;
}

// --- hpo -------------------------------------------------------------------

namespace {

RunPlan PlanForPoint(const RunConfig& config, const GridSpec& grid,
                     const GridPoint& point, std::uint64_t seed) {
  RunPlan plan = DefaultPlan(config, seed);
  if (auto v = point.Find(grid, kLearningRateAxis)) plan.learning_rate = *v;
  if (auto v = point.Find(grid, kClipParamAxis)) plan.clip_param = *v;
  if (auto v = point.Find(grid, kBatchSizeAxis)) {
    plan.batch_size = static_cast<Index>(std::llround(*v));
  }
  return plan;
}

// Largest RDP at each order over the given curves (same order grid).
RdpCurve PointwiseMax(const std::vector<RdpCurve>& curves) {
  RdpCurve out = curves.front();
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].rdp = std::max(out[i].rdp, c[i].rdp);
    }
  }
  return out;
}

std::string CsvNumber(double x) {
  return std::isfinite(x) ? FormatDouble(x) : std::string();
}

}  // namespace

json CmdHpo(const RunConfig& config) {
  if (!config.hpo) throw ParameterError("hpo: config has no hpo block");
  const HpoConfig& h = *config.hpo;
  const std::vector<GridPoint> grid = BuildGrid(h.grid);
  const Index g = static_cast<Index>(grid.size());
  const DataSplits data = LoadData(config.dataset);
  const Dataset& eval_on = data.validation ? *data.validation : data.test;
  const Index n = data.train.size();

  // Mechanisms the grid can produce: one per distinct sampling rate.
  std::map<double, TrainConfig> mechanisms;
  for (const auto& point : grid) {
    const RunPlan plan = PlanForPoint(config, h.grid, point, 1);
    const TrainConfig t = ResolveTrainConfig(config, plan, n);
    mechanisms.emplace(t.sampling_rate, t);
  }
  const bool is_private = !config.training.base.noiseless;

  const Objective objective = [&](const GridPoint& point,
                                  std::uint64_t seed) {
    const RunPlan plan = PlanForPoint(config, h.grid, point, seed);
    const SeedOutcome out = RunPlanOnce(config, plan, data.train, eval_on);
    TrialOutcome o;
    o.objective = out.eval.macro_acc;
    o.macro_acc = out.eval.macro_acc;
    o.worst_acc = out.eval.worst_acc;
    o.per_run_epsilon = out.run.epsilon
                            ? out.run.epsilon->epsilon
                            : std::numeric_limits<double>::quiet_NaN();
    return o;
  };

  std::optional<TruncatedNegativeBinomial> tnb;
  std::optional<Index> fixed = h.fixed_trials;
  if (!fixed) {
    if (h.tnb_eta || h.tnb_gamma) {
      tnb.emplace(h.tnb_eta.value_or(1.0),
                  h.tnb_gamma.value_or(1.0 / static_cast<double>(g)));
    } else if (g > 1) {
      tnb.emplace(TruncatedNegativeBinomial::WithMean(static_cast<double>(g)));
    } else {
      fixed = 1;
    }
  }
  Rng search_rng(h.search_seed);
  const HpoResult result =
      RunRandomSearch(grid, tnb, fixed, objective, search_rng);

  const std::filesystem::path root(config.output_dir);
  {
    auto path = root / "sweep.csv";
    std::filesystem::create_directories(root);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << kSweepHeader << '\n';
    for (const auto& trial : result.trials) {
      const RunPlan plan = PlanForPoint(config, h.grid, trial.point,
                                        trial.seed);
      const double batch =
          plan.batch_size ? static_cast<double>(*plan.batch_size)
                          : config.training.base.sampling_rate *
                                static_cast<double>(n);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const TrialOutcome& o = trial.outcome;
      out << trial.trial_index << ',' << FormatDouble(plan.learning_rate)
          << ',' << FormatDouble(plan.clip_param) << ','
          << FormatDouble(batch) << ',' << trial.seed << ','
          << CsvNumber(trial.failed ? nan : o.objective) << ','
          << CsvNumber(trial.failed ? nan : o.macro_acc) << ','
          << CsvNumber(trial.failed ? nan : o.worst_acc) << ','
          << CsvNumber(trial.failed ? nan : o.per_run_epsilon) << '\n';
    }
  }

  json m;
  m["config"] = config.raw;
  m["seeds"] = config.seeds;
  m["policy"] = ToString(h.policy);
  m["grid"] = h.grid_name;
  m["G"] = g;
  m["K"] = result.trials_drawn;
  if (tnb) {
    m["tnb"] = {{"eta", tnb->eta()}, {"gamma", tnb->gamma()}};
  } else {
    m["fixed_trials"] = *fixed;
  }
  m["search_seed"] = h.search_seed;
  m["delta"] = config.privacy.delta;

  json mech = json::array();
  std::vector<RdpCurve> curves;
  for (const auto& [q, t] : mechanisms) {
    const MechanismParams p = MechanismFor(t);
    json entry = {{"sampling_rate", q},
                  {"steps", t.ResolvedSteps()},
                  {"sigma_grad", t.sigma_grad},
                  {"sigma_count", SigmaCount(t)}};
    if (is_private) {
      curves.push_back(Account(p));
      entry["epsilon"] = Epsilon(p).epsilon;
    }
    mech.push_back(entry);
  }
  m["mechanisms"] = mech;
  if (mechanisms.size() == 1) {
    const TrainConfig& t = mechanisms.begin()->second;
    m["sigma_grad"] = t.sigma_grad;
    m["sigma_count"] = SigmaCount(t);
    m["steps"] = t.ResolvedSteps();
    m["sampling_rate"] = t.sampling_rate;
  } else {
    m["sigma_grad"] = m["sigma_count"] = m["steps"] = m["sampling_rate"] =
        nullptr;
  }

  std::vector<std::string> flags;
  if (is_private) {
    const RdpCurve per_run = PointwiseMax(curves);
    const double delta = config.privacy.delta;
    const EpsilonResult single = RdpToEpsilon(per_run, delta);
    const double total = DphpoTotalEpsilon(per_run, delta, g, h.policy);
    m["per_run_epsilon"] = single.epsilon;
    m["epsilon_total"] = total;
    m["epsilon"] = total;
    m["opt_order"] = single.order;
    // A final retraining with the chosen configuration, charged on top.
    m["final_run_epsilon"] = single.epsilon;
    m["epsilon_with_final_run"] =
        h.policy == ChargePolicy::kGridComposition
            ? RdpToEpsilon(Compose(per_run, static_cast<double>(g + 1)),
                           delta)
                  .epsilon
            : RdpToEpsilon(Compose(per_run, 2.0), delta).epsilon;
    if (h.policy == ChargePolicy::kSingleRun) {
      flags.push_back("hpo_charged_single_run");
    }
  } else {
    m["per_run_epsilon"] = m["epsilon_total"] = m["epsilon"] =
        m["opt_order"] = m["final_run_epsilon"] =
            m["epsilon_with_final_run"] = nullptr;
    flags.push_back("noiseless");
  }
  m["non_private_flags"] = flags;
  m["accountant"] = kAccountantName;

  Index failed = 0;
  for (const auto& t : result.trials) failed += t.failed ? 1 : 0;
  m["failed_trials"] = failed;
  if (result.best_trial) {
    const TrialRecord& best = result.trials[*result.best_trial];
    const RunPlan plan = PlanForPoint(config, h.grid, best.point, best.seed);
    json b = {{"trial_index", best.trial_index},
              {"learning_rate", plan.learning_rate},
              {"clip_param", plan.clip_param},
              {"seed", best.seed},
              {"objective", best.outcome.objective},
              {"macro_acc", best.outcome.macro_acc},
              {"worst_acc", best.outcome.worst_acc}};
    b["batch_size"] =
        plan.batch_size ? json(*plan.batch_size) : json(nullptr);
    m["best"] = b;
    m["metrics"] = {{"macro_acc", best.outcome.macro_acc},
                    {"worst_acc", best.outcome.worst_acc}};
  } else {
    m["best"] = nullptr;
    m["metrics"] = nullptr;
  }
  m["version"] = VersionString();
  WriteJson(root / "manifest.json", m);
  return m;
}

// --- account / grid ----------------------------------------------------------

json CmdAccount(const AccountArgs& a) {
  if (a.count_ratio < 0.0) {
    throw ParameterError("account: count ratio must be >= 0");
  }
  MechanismParams p;
  p.sampling_rate = a.sampling_rate;
  p.steps = a.steps;
  p.delta = a.delta;
  if (a.calibrate_epsilon) {
    p.sigma_grad = CalibrateSigma(*a.calibrate_epsilon, a.delta,
                                  a.sampling_rate, a.steps, a.count_ratio);
  } else if (a.sigma_grad) {
    p.sigma_grad = *a.sigma_grad;
  } else {
    throw ParameterError("account: give --sigma-grad or --calibrate");
  }
  if (a.count_ratio > 0.0) p.sigma_count = a.count_ratio * p.sigma_grad;
  p.Validate();
  const EpsilonResult e = Epsilon(p);
  json j;
  j["sampling_rate"] = p.sampling_rate;
  j["steps"] = p.steps;
  j["sigma_grad"] = p.sigma_grad;
  j["sigma_count"] = p.sigma_count ? json(*p.sigma_count) : json(nullptr);
  j["combined_sigma"] = CombinedSigma(p.sigma_grad, p.sigma_count);
  j["delta"] = p.delta;
  j["epsilon"] = e.epsilon;
  j["opt_order"] = e.order;
  j["accountant"] = kAccountantName;
  if (a.calibrate_epsilon) j["target_epsilon"] = *a.calibrate_epsilon;
  return j;
}

void CmdGrid(const GridSpec& grid, std::ostream& out) {
  const std::vector<GridPoint> points = BuildGrid(grid);
  out << "index";
  for (const auto& axis : grid.axes) out << '\t' << axis.name;
  out << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << i;
    for (double v : points[i].values) out << '\t' << FormatDouble(v);
    out << '\n';
  }
  out << "# G = " << points.size() << '\n';
}

}  // namespace clipbound
