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

// Command-line driver: toy | train | hpo | account | grid.

#include <iostream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "CLI11.hpp"

#include "clipbound/commands.h"
#include "clipbound/config.h"
#include "clipbound/errors.h"

namespace {

using clipbound::LoadRunConfig;
using clipbound::RunConfig;

RunConfig Load(const std::string& path, const std::string& output_dir) {
  RunConfig config = LoadRunConfig(path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Per-step temporaries are a few MB; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 1 << 25);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Normalized DPSGD with constant, adaptive and lower-bounded "
               "adaptive clipping"};
  app.require_subcommand(1);
  app.set_version_flag("--version", clipbound::VersionString());

  std::string config_path;
  std::string output_dir;

  auto* toy = app.add_subcommand("toy", "Bimodal mean estimation, all modes");
  toy->add_option("config", config_path, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  toy->add_option("-o,--output-dir", output_dir, "Override output_dir");

  auto* train = app.add_subcommand("train", "Train and evaluate every seed");
  train->add_option("config", config_path, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("-o,--output-dir", output_dir, "Override output_dir");

  auto* hpo = app.add_subcommand("hpo", "Randomized grid search");
  hpo->add_option("config", config_path, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  hpo->add_option("-o,--output-dir", output_dir, "Override output_dir");

  clipbound::AccountArgs acc;
  double sigma_grad = 0.0;
  double calibrate = 0.0;
  auto* account = app.add_subcommand("account", "Privacy accounting");
  account->add_option("--q", acc.sampling_rate, "Sampling rate")
      ->check(CLI::Range(0.0, 1.0));
  account->add_option("--T", acc.steps, "Number of steps")
      ->check(CLI::PositiveNumber);
  auto* sigma_opt =
      account->add_option("--sigma-grad", sigma_grad, "Gradient noise");
  account->add_option("--count-ratio", acc.count_ratio,
                      "sigma_count / sigma_grad (0: no count query)")
      ->check(CLI::NonNegativeNumber);
  account->add_option("--delta", acc.delta, "Target delta")
      ->check(CLI::Range(0.0, 1.0));
  auto* cal_opt = account->add_option(
      "--calibrate,--epsilon", calibrate,
      "Find the smallest sigma_grad reaching this epsilon");
  sigma_opt->excludes(cal_opt);

  std::string grid_name = "lr_clip";
  auto* grid = app.add_subcommand("grid", "Print a search grid");
  grid->add_option("name", grid_name, "lr_clip | batch_lr_clip")
      ->check(CLI::IsMember({"lr_clip", "batch_lr_clip"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*toy) {
      const auto summary = clipbound::CmdToy(Load(config_path, output_dir));
      std::cout << summary.ToJson().dump(2) << '\n';
    } else if (*train) {
      bool all_ok = true;
      const auto agg =
          clipbound::CmdTrain(Load(config_path, output_dir), &all_ok);
      std::cout << agg["metrics"].dump(2) << '\n';
      return all_ok ? 0 : 1;
    } else if (*hpo) {
      const auto m = clipbound::CmdHpo(Load(config_path, output_dir));
      std::cout << "G = " << m["G"] << ", K = " << m["K"]
                << ", epsilon_total = " << m["epsilon_total"] << '\n'
                << "best: " << m["best"].dump() << '\n';
    } else if (*account) {
      if (*sigma_opt) acc.sigma_grad = sigma_grad;
      if (*cal_opt) acc.calibrate_epsilon = calibrate;
      const auto j = clipbound::CmdAccount(acc);
      std::cout << "epsilon = " << clipbound::FormatDouble(j["epsilon"])
                << " (order " << j["opt_order"] << "), sigma_grad = "
                << clipbound::FormatDouble(j["sigma_grad"]) << '\n'
                << j.dump(2) << '\n';
    } else if (*grid) {
      clipbound::CmdGrid(clipbound::GridByName(grid_name), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
