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

#include "clipbound/config.h"

#include <cstdlib>
#include <fstream>
#include <set>

#include "clipbound/errors.h"

namespace clipbound {
namespace {

using nlohmann::json;

void CheckKeys(const json& obj, const std::set<std::string>& allowed,
               const std::string& block) {
  if (!obj.is_object()) {
    throw ParameterError("config: '" + block + "' must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ParameterError("config: unknown key '" + key + "' in '" + block +
                           "'");
    }
  }
}

template <typename T>
void Read(const json& obj, const char* key, T& out, const std::string& block) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParameterError("config: '" + block + "." + key +
                         "' has the wrong type");
  }
}

template <typename T>
void Read(const json& obj, const char* key, std::optional<T>& out,
          const std::string& block) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  Read(obj, key, value, block);
  out = value;
}

DatasetConfig ParseDataset(const json& j) {
  CheckKeys(j,
            {"kind", "data_seed", "n", "p_major", "mode_lo", "mode_hi", "jitter_std",
             "n_per_class", "test_per_class", "num_classes",
             "cluster_separation", "dim", "minority_class", "keep_fraction",
             "data_dir", "train_images", "train_labels", "test_images",
             "test_labels", "train_csv", "test_csv", "test_fraction",
             "balance_groups", "validation_fraction"},
            "dataset");
  DatasetConfig d;
  const std::string b = "dataset";
  Read(j, "kind", d.kind, b);
  Read(j, "data_seed", d.data_seed, b);
  Read(j, "n", d.n, b);
  Read(j, "p_major", d.p_major, b);
  Read(j, "mode_lo", d.mode_lo, b);
  Read(j, "mode_hi", d.mode_hi, b);
  Read(j, "jitter_std", d.jitter_std, b);
  Read(j, "n_per_class", d.n_per_class, b);
  Read(j, "test_per_class", d.test_per_class, b);
  Read(j, "num_classes", d.num_classes, b);
  Read(j, "cluster_separation", d.cluster_separation, b);
  Read(j, "dim", d.dim, b);
  Read(j, "minority_class", d.minority_class, b);
  Read(j, "keep_fraction", d.keep_fraction, b);
  Read(j, "data_dir", d.data_dir, b);
  Read(j, "train_images", d.train_images, b);
  Read(j, "train_labels", d.train_labels, b);
  Read(j, "test_images", d.test_images, b);
  Read(j, "test_labels", d.test_labels, b);
  Read(j, "train_csv", d.train_csv, b);
  Read(j, "test_csv", d.test_csv, b);
  Read(j, "test_fraction", d.test_fraction, b);
  Read(j, "balance_groups", d.balance_groups, b);
  Read(j, "validation_fraction", d.validation_fraction, b);

  static const std::set<std::string> kinds = {"bimodal", "skewed_synthetic",
                                              "idx", "adult", "dutch"};
  if (!kinds.count(d.kind)) {
    throw ParameterError("config: unknown dataset kind '" + d.kind + "'");
  }
  if (d.n < 1 || d.n_per_class < 1 || d.test_per_class < 1) {
    throw ParameterError("config: dataset sizes must be >= 1");
  }
  if (!(d.p_major > 0.0 && d.p_major < 1.0)) {
    throw ParameterError("config: dataset.p_major must lie in (0, 1)");
  }
  if (!(d.jitter_std >= 0.0)) {
    throw ParameterError("config: dataset.jitter_std must be >= 0");
  }
  if (!(d.keep_fraction > 0.0 && d.keep_fraction <= 1.0)) {
    throw ParameterError("config: dataset.keep_fraction must lie in (0, 1]");
  }
  if (d.num_classes < 2 || d.dim < 1) {
    throw ParameterError("config: dataset needs num_classes >= 2, dim >= 1");
  }
  if (d.minority_class &&
      (*d.minority_class < 0 ||
       (d.kind == "skewed_synthetic" && *d.minority_class >= d.num_classes))) {
    throw ParameterError("config: dataset.minority_class out of range");
  }
  if (!(d.test_fraction > 0.0 && d.test_fraction < 1.0)) {
    throw ParameterError("config: dataset.test_fraction must lie in (0, 1)");
  }
  if (!(d.validation_fraction >= 0.0 && d.validation_fraction < 1.0)) {
    throw ParameterError(
        "config: dataset.validation_fraction must lie in [0, 1)");
  }
  if ((d.kind == "adult" || d.kind == "dutch") && d.train_csv.empty()) {
    throw ParameterError("config: dataset.train_csv is required for " +
                         d.kind);
  }
  if (const char* env = std::getenv(kDataDirEnv); env && *env) {
    d.data_dir = env;
  }
  return d;
}

ModelConfig ParseModel(const json& j) {
  CheckKeys(j, {"kind", "hidden"}, "model");
  ModelConfig m;
  std::string kind = ToString(m.kind);
  Read(j, "kind", kind, "model");
  m.kind = ParseModelKind(kind);
  Read(j, "hidden", m.hidden, "model");
  if (m.kind == ModelKind::kMlp && m.hidden < 1) {
    throw ParameterError("config: model.hidden must be >= 1 for mlp");
  }
  return m;
}

OptimizerConfig ParseOptimizer(const json& j) {
  CheckKeys(j, {"kind", "momentum", "beta1", "beta2", "epsilon"},
            "training.optimizer");
  OptimizerConfig o;
  const std::string b = "training.optimizer";
  std::string kind = ToString(o.kind);
  Read(j, "kind", kind, b);
  o.kind = ParseOptimizerKind(kind);
  Read(j, "momentum", o.momentum, b);
  Read(j, "beta1", o.beta1, b);
  Read(j, "beta2", o.beta2, b);
  Read(j, "epsilon", o.epsilon, b);
  return o;
}

TrainingConfig ParseTraining(const json& j) {
  CheckKeys(j,
            {"steps", "epochs", "sampling_rate", "batch_size",
             "learning_rate", "strategy", "clip_param", "initial_bound",
             "target_quantile", "threshold_multiplier", "bound_learning_rate",
             "optimizer", "noiseless", "record_norm_quantiles"},
            "training");
  TrainingConfig t;
  const std::string b = "training";
  Read(j, "steps", t.base.steps, b);
  Read(j, "epochs", t.base.epochs, b);
  Read(j, "sampling_rate", t.base.sampling_rate, b);
  Read(j, "batch_size", t.batch_size, b);
  Read(j, "learning_rate", t.base.learning_rate, b);
  std::string strategy = ToString(t.strategy);
  Read(j, "strategy", strategy, b);
  t.strategy = ParseClippingStrategy(strategy);
  Read(j, "clip_param", t.clip_param, b);
  ClippingConfig& c = t.base.clipping;
  Read(j, "initial_bound", c.initial_bound, b);
  Read(j, "target_quantile", c.target_quantile, b);
  Read(j, "threshold_multiplier", c.threshold_multiplier, b);
  Read(j, "bound_learning_rate", c.bound_learning_rate, b);
  if (j.contains("optimizer")) t.base.optimizer = ParseOptimizer(j["optimizer"]);
  Read(j, "noiseless", t.base.noiseless, b);
  Read(j, "record_norm_quantiles", t.base.record_norm_quantiles, b);

  if (t.base.steps < 0) throw ParameterError("config: training.steps < 0");
  if (t.batch_size && *t.batch_size < 1) {
    throw ParameterError("config: training.batch_size must be >= 1");
  }
  if (!(t.clip_param > 0.0)) {
    throw ParameterError("config: training.clip_param must be > 0");
  }
  // Validate the clipping and loop parameters with a representative config.
  TrainConfig probe = t.base;
  const double c0 = c.initial_bound;
  probe.clipping = ClippingConfig::ForStrategy(t.strategy, t.clip_param);
  probe.clipping.target_quantile = c.target_quantile;
  probe.clipping.threshold_multiplier = c.threshold_multiplier;
  probe.clipping.bound_learning_rate = c.bound_learning_rate;
  if (t.strategy == ClippingStrategy::kBounded) {
    probe.clipping.initial_bound = std::max(c0, t.clip_param);
  }
  probe.Validate();
  return t;
}

PrivacyConfig ParsePrivacy(const json& j) {
  CheckKeys(j, {"target_epsilon", "sigma_grad", "delta", "count_ratio"},
            "privacy");
  PrivacyConfig p;
  const std::string b = "privacy";
  Read(j, "target_epsilon", p.target_epsilon, b);
  Read(j, "sigma_grad", p.sigma_grad, b);
  Read(j, "delta", p.delta, b);
  Read(j, "count_ratio", p.count_ratio, b);
  if (p.target_epsilon.has_value() == p.sigma_grad.has_value()) {
    throw ParameterError(
        "config: privacy needs exactly one of target_epsilon, sigma_grad");
  }
  if (p.target_epsilon && !(*p.target_epsilon > 0.0)) {
    throw ParameterError("config: privacy.target_epsilon must be > 0");
  }
  if (p.sigma_grad && !(*p.sigma_grad > 0.0)) {
    throw ParameterError("config: privacy.sigma_grad must be > 0");
  }
  if (!(p.delta > 0.0 && p.delta < 1.0)) {
    throw ParameterError("config: privacy.delta must lie in (0, 1)");
  }
  if (!(p.count_ratio >= 0.0)) {
    throw ParameterError("config: privacy.count_ratio must be >= 0");
  }
  return p;
}

HpoConfig ParseHpo(const json& j) {
  CheckKeys(j,
            {"grid", "axes", "policy", "fixed_trials", "tnb_eta", "tnb_gamma",
             "search_seed"},
            "hpo");
  HpoConfig h;
  const std::string b = "hpo";
  Read(j, "grid", h.grid_name, b);
  if (j.contains("axes")) {
    if (!j.contains("grid")) h.grid_name = "custom";
    if (h.grid_name != "custom") {
      throw ParameterError("config: hpo.axes requires grid 'custom'");
    }
    const json& axes = j["axes"];
    if (!axes.is_object()) {
      throw ParameterError("config: hpo.axes must map axis name to values");
    }
    // Fixed axis order regardless of key order in the file.
    for (const char* name : {kBatchSizeAxis, kLearningRateAxis,
                             kClipParamAxis}) {
      if (!axes.contains(name)) continue;
      GridAxis axis{name, {}};
      Read(axes, name, axis.values, "hpo.axes");
      h.grid.axes.push_back(std::move(axis));
    }
    CheckKeys(axes, {kBatchSizeAxis, kLearningRateAxis, kClipParamAxis},
              "hpo.axes");
  } else {
    h.grid = GridByName(h.grid_name);
  }
  h.grid.Validate();
  std::string policy = ToString(h.policy);
  Read(j, "policy", policy, b);
  h.policy = ParseChargePolicy(policy);
  Read(j, "fixed_trials", h.fixed_trials, b);
  Read(j, "tnb_eta", h.tnb_eta, b);
  Read(j, "tnb_gamma", h.tnb_gamma, b);
  Read(j, "search_seed", h.search_seed, b);
  if (h.fixed_trials && *h.fixed_trials < 1) {
    throw ParameterError("config: hpo.fixed_trials must be >= 1");
  }
  return h;
}

ToyConfig ParseToy(const json& j) {
  CheckKeys(j, {"constant_bound", "lower_bound", "initial_bound"}, "toy");
  ToyConfig t;
  Read(j, "constant_bound", t.constant_bound, "toy");
  Read(j, "lower_bound", t.lower_bound, "toy");
  Read(j, "initial_bound", t.initial_bound, "toy");
  if (!(t.constant_bound > 0.0 && t.lower_bound > 0.0 &&
        t.initial_bound > 0.0)) {
    throw ParameterError("config: toy bounds must be > 0");
  }
  return t;
}

}  // namespace

std::filesystem::path DatasetConfig::Resolve(const std::string& file) const {
  const std::filesystem::path p(file);
  if (p.is_absolute()) return p;
  return std::filesystem::path(data_dir) / p;
}

GridSpec GridByName(const std::string& name) {
  if (name == "lr_clip") return LearningRateClipGrid();
  if (name == "batch_lr_clip") return BatchLearningRateClipGrid();
  throw ParameterError("config: unknown grid '" + name + "'");
}

RunConfig ParseRunConfig(const json& j) {
  CheckKeys(j,
            {"dataset", "model", "training", "privacy", "hpo", "toy",
             "output_dir", "seeds"},
            "config");
  RunConfig c;
  c.raw = j;
  if (j.contains("dataset")) c.dataset = ParseDataset(j["dataset"]);
  if (j.contains("model")) c.model = ParseModel(j["model"]);
  if (j.contains("training")) c.training = ParseTraining(j["training"]);
  if (j.contains("privacy")) {
    c.privacy = ParsePrivacy(j["privacy"]);
    c.training.base.delta = c.privacy.delta;
  }
  if (j.contains("hpo")) c.hpo = ParseHpo(j["hpo"]);
  if (j.contains("toy")) c.toy = ParseToy(j["toy"]);
  Read(j, "output_dir", c.output_dir, "config");
  Read(j, "seeds", c.seeds, "config");
  if (c.seeds.empty()) throw ParameterError("config: seeds must be nonempty");
  if (c.output_dir.empty()) {
    throw ParameterError("config: output_dir must be nonempty");
  }
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParameterError("config: " + path.string() + ": " + e.what());
  }
  return ParseRunConfig(j);
}

}  // namespace clipbound
