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

#ifndef CLIPBOUND_COMMANDS_H_
#define CLIPBOUND_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "clipbound/config.h"
#include "clipbound/datasets.h"
#include "clipbound/trainer.h"

namespace clipbound {

std::string VersionString();

inline constexpr const char* kAccountantName =
    "rdp-subsampled-gaussian-integer-orders";
inline constexpr const char* kHistoryHeader =
    "step,loss,clip_bound,noisy_clip_fraction,grad_norm_p50,grad_norm_p90,"
    "grad_norm_max";
inline constexpr const char* kSweepHeader =
    "trial_index,learning_rate,clip_param,batch_size,seed,objective,"
    "macro_acc,worst_acc,per_run_epsilon";

// Shortest round-trip decimal form; identical input gives identical text.
std::string FormatDouble(double x);

void WriteHistoryCsv(std::ostream& out, const std::vector<HistoryRow>& rows);
void WriteHistoryCsv(const std::filesystem::path& path,
                     const std::vector<HistoryRow>& rows);
// Pretty-printed with a trailing newline.
void WriteJson(const std::filesystem::path& path, const nlohmann::json& j);

struct DataSplits {
  Dataset train;
  std::optional<Dataset> validation;
  Dataset test;
};

// Builds or loads the configured dataset with Rng(config.data_seed).
DataSplits LoadData(const DatasetConfig& config);

ModelSpec SpecFor(const ModelConfig& model, const Dataset& train);

struct Evaluation {
  double macro_acc = 0.0;
  double micro_acc = 0.0;
  double worst_acc = 0.0;
  int worst_class = 0;
  std::vector<double> group_acc;  // empty without protected groups

  nlohmann::json ToJson() const;
};

Evaluation Evaluate(const ModelState& state, const Dataset& data);

// One fully resolved training run.
struct RunPlan {
  ClippingStrategy strategy = ClippingStrategy::kBounded;
  double clip_param = 0.1;
  double learning_rate = 1.0;
  std::optional<Index> batch_size;
  std::uint64_t seed = 1;
};

// Fills clipping, q, noise multipliers (calibrating when the privacy block
// gives a target) and seed for `plan` on a training set of `n` rows.
TrainConfig ResolveTrainConfig(const RunConfig& config, const RunPlan& plan,
                               Index n);

RunPlan DefaultPlan(const RunConfig& config, std::uint64_t seed);

struct SeedOutcome {
  TrainConfig train_config;
  RunResult run;
  Evaluation eval;
};

// Trains on splits.train with Rng(seed) and evaluates on `eval_on`.
SeedOutcome RunPlanOnce(const RunConfig& config, const RunPlan& plan,
                        const Dataset& train, const Dataset& eval_on);

// Manifest for one run; `config` is the raw config snapshot.
nlohmann::json RunManifest(const RunConfig& config, const SeedOutcome& out);

struct ToyModeResult {
  ClippingStrategy strategy;
  double final_estimate = 0.0;
  double final_clip_bound = 0.0;
  std::vector<HistoryRow> history;
};

struct ToySummary {
  std::vector<ToyModeResult> modes;  // unbounded, bounded, constant
  nlohmann::json ToJson() const;
};

// The three clipping strategies on the bimodal task with a shared seed.
// Writes history_<mode>.csv, summary.json and manifest.json when
// `write_outputs` is set.
ToySummary CmdToy(const RunConfig& config, bool write_outputs = true);

// Every seed: calibrate, train, evaluate on the test split. Writes
// seed_<s>/{history.csv,manifest.json}, aggregate.json and manifest.json.
// Returns the aggregate; `*all_ok` reports whether every seed finished.
nlohmann::json CmdTrain(const RunConfig& config, bool* all_ok = nullptr);

// Random search over the configured grid; writes sweep.csv and
// manifest.json. Returns the manifest.
nlohmann::json CmdHpo(const RunConfig& config);

struct AccountArgs {
  double sampling_rate = 1.0;
  Index steps = 1;
  std::optional<double> sigma_grad;
  double count_ratio = 0.0;  // 0: single query
  double delta = kDefaultDelta;
  std::optional<double> calibrate_epsilon;
};

nlohmann::json CmdAccount(const AccountArgs& args);

// One line per grid point, tab-separated, preceded by a header.
void CmdGrid(const GridSpec& grid, std::ostream& out);

}  // namespace clipbound

#endif  // CLIPBOUND_COMMANDS_H_
