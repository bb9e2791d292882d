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

#ifndef CLIPBOUND_TRAINER_H_
#define CLIPBOUND_TRAINER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clipbound/clipping.h"
#include "clipbound/datasets.h"
#include "clipbound/models.h"
#include "clipbound/numkit.h"
#include "clipbound/privacy.h"

namespace clipbound {

enum class OptimizerKind { kSgd, kMomentum, kAdam };

std::string ToString(OptimizerKind kind);
OptimizerKind ParseOptimizerKind(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double momentum = 0.9;  // kMomentum
  double beta1 = 0.9;     // kAdam
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Post-processing update applied to the privatized gradient.
//   sgd:      theta -= lr * g
//   momentum: v = beta * v + g; theta -= lr * v
//   adam:     bias-corrected first/second moments
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, Index dim);

  void Update(Vector& params, const Vector& grad, double learning_rate);

 private:
  OptimizerConfig config_;
  Vector first_;
  Vector second_;
  Index step_ = 0;
};

struct TrainConfig {
  // T. When 0, derived as epochs * ceil(1 / q).
  Index steps = 0;
  double epochs = 1.0;
  double sampling_rate = 1.0;  // q; expected batch size B = q * N
  double learning_rate = 1.0;
  double sigma_grad = 0.0;
  double sigma_count = 0.0;  // used only with adaptive clipping
  ClippingConfig clipping;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  // Forces sigma_grad = sigma_count = 0 and marks the run non-private.
  bool noiseless = false;
  bool record_norm_quantiles = true;
  double delta = kDefaultDelta;

  Index ResolvedSteps() const;
  void Validate() const;
};

struct HistoryRow {
  Index step = 0;
  double loss = 0.0;
  double clip_bound = 0.0;
  std::optional<double> noisy_clip_fraction;  // adaptive only
  double grad_norm_p50 = 0.0;
  double grad_norm_p90 = 0.0;
  double grad_norm_max = 0.0;
};

// How often the loop read raw per-sample gradients, by access path.
struct AccessCounts {
  Index clipped_sums = 0;
  Index exceed_counts = 0;
  Index diagnostics = 0;
};

// The per-sample gradients of one batch. Training code reaches them only
// through these methods; ClippedSum and CountExceeding are the two
// privatized queries, the rest feed non-private diagnostics.
class SensitiveBatch {
 public:
  SensitiveBatch(PerSampleGrads grads, AccessCounts* counts);

  Index size() const { return grads_.size(); }
  Index dim() const { return grads_.dim; }

  // sum_i g_i * min(1/C, 1/||g_i||). Each summand has norm <= 1.
  Vector ClippedSum(double bound) const;
  Index CountExceeding(double tau, double bound) const;

  double MeanLoss() const;
  // (p50, p90, max) of the raw gradient norms.
  std::array<double, 3> NormQuantiles() const;

 private:
  PerSampleGrads grads_;
  AccessCounts* counts_;
};

struct RunResult {
  ModelState final_state;
  std::vector<HistoryRow> history;
  double final_clip_bound = 0.0;  // C_T, after the last update
  MechanismParams mechanism;
  std::optional<EpsilonResult> epsilon;  // absent for non-private runs
  std::vector<std::string> non_private_flags;
  AccessCounts access;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::vector<HistoryRow> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<HistoryRow>& history() const { return history_; }

 private:
  std::vector<HistoryRow> history_;
};

inline constexpr double kDivergenceLoss = 1e6;

// Replaces the model's gradient computation, e.g. to replay recorded
// gradients. Receives the current state and the batch row indices.
using GradientSource = std::function<PerSampleGrads(
    const ModelState&, const std::vector<Index>& batch)>;

// One run of normalized DPSGD with constant or adaptive clipping, starting
// from InitParams(spec, rng.Split("init")).
RunResult Train(const TrainConfig& config, const Dataset& data,
                const ModelSpec& spec, Rng& rng);

// Same loop from an explicit initial state.
RunResult TrainFrom(const TrainConfig& config, const Dataset& data,
                    ModelState initial, Rng& rng,
                    const GradientSource& source = {});

// Ledger parameters for a config: no count query for constant clipping.
MechanismParams MechanismFor(const TrainConfig& config);

}  // namespace clipbound

#endif  // CLIPBOUND_TRAINER_H_
