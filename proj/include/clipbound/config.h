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

#ifndef CLIPBOUND_CONFIG_H_
#define CLIPBOUND_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "clipbound/clipping.h"
#include "clipbound/hpo.h"
#include "clipbound/models.h"
#include "clipbound/trainer.h"

namespace clipbound {

// Environment variable that replaces the dataset path root.
inline constexpr const char* kDataDirEnv = "CLIPBOUND_DATA_DIR";

struct DatasetConfig {
  // bimodal | skewed_synthetic | idx | adult | dutch
  std::string kind = "bimodal";
  // Generation / split seed, shared by every training seed.
  std::uint64_t data_seed = 0;

  // bimodal
  Index n = 10000;
  double p_major = 0.6;
  double mode_lo = 0.0;
  double mode_hi = 1.0;
  double jitter_std = 0.05;

  // skewed_synthetic
  Index n_per_class = 1000;
  Index test_per_class = 500;
  int num_classes = 10;
  double cluster_separation = 4.0;
  Index dim = 20;

  // skewed_synthetic and idx
  std::optional<int> minority_class;
  double keep_fraction = 0.10;

  // idx / adult / dutch; relative paths resolve against data_dir.
  std::string data_dir = ".";
  std::string train_images = "train-images-idx3-ubyte";
  std::string train_labels = "train-labels-idx1-ubyte";
  std::string test_images = "t10k-images-idx3-ubyte";
  std::string test_labels = "t10k-labels-idx1-ubyte";
  std::string train_csv;
  std::string test_csv;  // empty: split the training file
  double test_fraction = 0.2;
  bool balance_groups = false;

  // Held out from the training split for tuning (0 disables).
  double validation_fraction = 0.0;

  std::filesystem::path Resolve(const std::string& file) const;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kMlp;
  Index hidden = 64;
};

struct TrainingConfig {
  // Everything except sigma_grad / sigma_count / clipping / seed, which are
  // filled per run.
  TrainConfig base;
  ClippingStrategy strategy = ClippingStrategy::kBounded;
  double clip_param = 0.1;
  // When set, q = batch_size / N.
  std::optional<Index> batch_size;
};

struct PrivacyConfig {
  std::optional<double> target_epsilon;
  std::optional<double> sigma_grad;
  double delta = kDefaultDelta;
  double count_ratio = kDefaultCountRatio;
};

struct HpoConfig {
  std::string grid_name = "lr_clip";  // lr_clip | batch_lr_clip | custom
  GridSpec grid;
  ChargePolicy policy = ChargePolicy::kGridComposition;
  std::optional<Index> fixed_trials;
  // Defaults to eta = 1, gamma = 1 / G.
  std::optional<double> tnb_eta;
  std::optional<double> tnb_gamma;
  std::uint64_t search_seed = 1;
};

struct ToyConfig {
  double constant_bound = 1.0;
  double lower_bound = 0.1;
  double initial_bound = 1.0;
};

struct RunConfig {
  nlohmann::json raw;  // as read, for the manifest snapshot
  DatasetConfig dataset;
  ModelConfig model;
  TrainingConfig training;
  PrivacyConfig privacy;
  std::optional<HpoConfig> hpo;
  ToyConfig toy;
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds = {1};

  bool has_privacy() const {
    return privacy.target_epsilon.has_value() || privacy.sigma_grad.has_value();
  }
};

// Parses and validates; throws ParameterError on unknown keys, wrong types
// or out-of-domain values. Applies CLIPBOUND_DATA_DIR when set.
RunConfig ParseRunConfig(const nlohmann::json& j);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// "lr_clip" or "batch_lr_clip"; anything else throws.
GridSpec GridByName(const std::string& name);

}  // namespace clipbound

#endif  // CLIPBOUND_CONFIG_H_
