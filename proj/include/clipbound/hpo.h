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

#ifndef CLIPBOUND_HPO_H_
#define CLIPBOUND_HPO_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "clipbound/numkit.h"
#include "clipbound/privacy.h"

namespace clipbound {

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

struct GridSpec {
  std::vector<GridAxis> axes;

  void Validate() const;
  Index Size() const;
};

// One grid cell: values[i] belongs to axes[i].
struct GridPoint {
  std::vector<double> values;

  double Get(const GridSpec& spec, const std::string& axis) const;
  std::optional<double> Find(const GridSpec& spec,
                             const std::string& axis) const;
};

// Cartesian product, first axis varying slowest.
std::vector<GridPoint> BuildGrid(const GridSpec& spec);

inline constexpr const char* kLearningRateAxis = "learning_rate";
inline constexpr const char* kClipParamAxis = "clip_param";
inline constexpr const char* kBatchSizeAxis = "batch_size";

// Learning rate (10 values) x clipping parameter (20 values).
GridSpec LearningRateClipGrid();
// Batch size (6 values) x learning rate x clipping parameter.
GridSpec BatchLearningRateClipGrid();

// Truncated negative binomial over k = 1, 2, ...:
//   eta != 0: P[k] = (1-g)^k / (g^-eta - 1) * prod_{l<k} (l + eta) / (l + 1)
//   eta == 0: P[k] = (1-g)^k / (k ln(1/g))
// The support is truncated once the remaining tail is below 1e-15 (or at
// kMaxSupport); sampling is inverse-CDF over the truncated, renormalized pmf.
class TruncatedNegativeBinomial {
 public:
  static constexpr Index kMaxSupport = 10'000'000;

  TruncatedNegativeBinomial(double eta, double gamma);

  // Geometric special case (eta = 1) with mean `expected_trials`.
  static TruncatedNegativeBinomial WithMean(double expected_trials);

  double eta() const { return eta_; }
  double gamma() const { return gamma_; }

  // Closed-form pmf; 0 for k < 1.
  double Pmf(Index k) const;
  double Mean() const;

  Index support_size() const { return static_cast<Index>(cdf_.size()); }
  // Sum of the pmf over the truncated support, before renormalization.
  double truncated_mass() const { return mass_; }

  Index Sample(Rng& rng) const;

 private:
  double eta_;
  double gamma_;
  double mass_ = 0.0;
  std::vector<double> cdf_;
};

struct TrialOutcome {
  double objective = 0.0;
  double per_run_epsilon = 0.0;
  double macro_acc = 0.0;
  double worst_acc = 0.0;
};

struct TrialRecord {
  Index trial_index = 0;
  Index grid_index = 0;
  GridPoint point;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  TrialOutcome outcome;
};

struct HpoResult {
  std::vector<TrialRecord> trials;
  Index trials_drawn = 0;
  std::optional<Index> best_trial;  // index into `trials`
};

// (point, trial seed) -> outcome. Exceptions mark the trial as failed.
using Objective =
    std::function<TrialOutcome(const GridPoint&, std::uint64_t seed)>;

// Draws K from `tnb` (or uses `fixed_trials`), samples K grid cells
// uniformly with replacement, and returns the argmax of the objective over
// successful trials (earliest trial wins ties).
HpoResult RunRandomSearch(const std::vector<GridPoint>& grid,
                          const std::optional<TruncatedNegativeBinomial>& tnb,
                          std::optional<Index> fixed_trials,
                          const Objective& objective, Rng& rng);

enum class ChargePolicy { kGridComposition, kSingleRun };

std::string ToString(ChargePolicy policy);
ChargePolicy ParseChargePolicy(const std::string& name);

// kGridComposition: the per-run curve composed grid_size times, then
// converted. kSingleRun: the per-run epsilon.
double DphpoTotalEpsilon(const RdpCurve& per_run, double delta,
                         Index grid_size, ChargePolicy policy);
double DphpoTotalEpsilon(const MechanismParams& per_run, Index grid_size,
                         ChargePolicy policy);

}  // namespace clipbound

#endif  // CLIPBOUND_HPO_H_
