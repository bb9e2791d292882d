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

#include "clipbound/hpo.h"

#include <algorithm>
#include <cmath>

#include "clipbound/errors.h"

namespace clipbound {

void GridSpec::Validate() const {
  if (axes.empty()) throw ParameterError("grid: no axes");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].values.empty()) {
      throw ParameterError("grid: axis '" + axes[i].name + "' is empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (axes[j].name == axes[i].name) {
        throw ParameterError("grid: duplicate axis '" + axes[i].name + "'");
      }
    }
  }
}

Index GridSpec::Size() const {
  Index size = 1;
  for (const auto& axis : axes) size *= static_cast<Index>(axis.values.size());
  return size;
}

std::optional<double> GridPoint::Find(const GridSpec& spec,
                                      const std::string& axis) const {
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    if (spec.axes[i].name == axis) return values.at(i);
  }
  return std::nullopt;
}

double GridPoint::Get(const GridSpec& spec, const std::string& axis) const {
  const auto v = Find(spec, axis);
  if (!v) throw ParameterError("grid: no axis named '" + axis + "'");
  return *v;
}

std::vector<GridPoint> BuildGrid(const GridSpec& spec) {
  spec.Validate();
  std::vector<GridPoint> grid;
  grid.reserve(spec.Size());
  std::vector<std::size_t> cursor(spec.axes.size(), 0);
  while (true) {
    GridPoint p;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) {
      p.values.push_back(spec.axes[i].values[cursor[i]]);
    }
    grid.push_back(std::move(p));
    std::size_t i = spec.axes.size();
    while (i > 0) {
      --i;
      if (++cursor[i] < spec.axes[i].values.size()) break;
      cursor[i] = 0;
      if (i == 0) return grid;
    }
  }
}

namespace {

const std::vector<double>& GridLearningRates() {
  static const std::vector<double> v = {1.0000, 1.2915, 1.6681, 2.1544,
                                        2.7826, 3.5938, 4.6416, 5.9948,
                                        7.7426, 10.0000};
  return v;
}

const std::vector<double>& GridClipParams() {
  static const std::vector<double> v = {
      0.0010, 0.0018, 0.0031, 0.0055,  0.0098,  0.0172,  0.0305,
      0.0539, 0.0952, 0.1682, 0.2973,  0.5254,  0.9285,  1.6409,
      2.9000, 5.1252, 9.0579, 16.0082, 28.2915, 50.0000};
  return v;
}

}  // namespace

GridSpec LearningRateClipGrid() {
  return GridSpec{{{kLearningRateAxis, GridLearningRates()},
                   {kClipParamAxis, GridClipParams()}}};
}

GridSpec BatchLearningRateClipGrid() {
  return GridSpec{{{kBatchSizeAxis, {1024, 2048, 4096, 8192, 16384, 32768}},
                   {kLearningRateAxis, GridLearningRates()},
                   {kClipParamAxis, GridClipParams()}}};
}

// --- Truncated negative binomial -------------------------------------------

TruncatedNegativeBinomial::TruncatedNegativeBinomial(double eta, double gamma)
    : eta_(eta), gamma_(gamma) {
  if (!(eta > -1.0) || !std::isfinite(eta)) {
    throw ParameterError("tnb: eta must be > -1");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ParameterError("tnb: gamma must lie in (0, 1)");
  }
  // P[k+1] = P[k] * (1 - gamma) * (k + eta) / (k + 1).
  double p = Pmf(1);
  double sum = 0.0;
  for (Index k = 1; k <= kMaxSupport; ++k) {
    sum += p;
    cdf_.push_back(sum);
    const double ratio = (1.0 - gamma) * (static_cast<double>(k) + eta) /
                         (static_cast<double>(k) + 1.0);
    // Geometric bound on the remaining tail once ratios stay below 1.
    const double worst_ratio = std::max(ratio, 1.0 - gamma);
    if (ratio < 1.0 && p * worst_ratio / (1.0 - worst_ratio) < 1e-16) break;
    p *= ratio;
  }
  mass_ = sum;
  if (std::abs(mass_ - 1.0) > 1e-9) {
    throw ParameterError("tnb: pmf does not normalize on the truncated support "
                         "(mass " + std::to_string(mass_) + ")");
  }
}

TruncatedNegativeBinomial TruncatedNegativeBinomial::WithMean(
    double expected_trials) {
  if (!(expected_trials > 1.0)) {
    throw ParameterError("tnb: expected number of trials must exceed 1");
  }
  return TruncatedNegativeBinomial(1.0, 1.0 / expected_trials);
}

double TruncatedNegativeBinomial::Pmf(Index k) const {
  if (k < 1) return 0.0;
  const double kd = static_cast<double>(k);
  if (eta_ == 1.0) return gamma_ * std::pow(1.0 - gamma_, kd - 1.0);
  if (eta_ == 0.0) {
    return std::pow(1.0 - gamma_, kd) / (kd * std::log(1.0 / gamma_));
  }
  // prod_{l<k} (l + eta) / (l + 1) = Gamma(k + eta) / (Gamma(eta) k!); its
  // sign is sign(eta), matching the sign of gamma^-eta - 1.
  const double log_prod =
      std::lgamma(kd + eta_) - std::lgamma(eta_) - std::lgamma(kd + 1.0);
  const double log_norm = std::log(std::abs(std::pow(gamma_, -eta_) - 1.0));
  return std::exp(kd * std::log1p(-gamma_) + log_prod - log_norm);
}

double TruncatedNegativeBinomial::Mean() const {
  double mean = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    mean += static_cast<double>(i + 1) * (cdf_[i] - prev);
    prev = cdf_[i];
  }
  return mean / mass_;
}

Index TruncatedNegativeBinomial::Sample(Rng& rng) const {
  const double u = rng.Uniform() * mass_;
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                            static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<Index>(idx) + 1;
}

// --- Search ------------------------------------------------------------------

HpoResult RunRandomSearch(const std::vector<GridPoint>& grid,
                          const std::optional<TruncatedNegativeBinomial>& tnb,
                          std::optional<Index> fixed_trials,
                          const Objective& objective, Rng& rng) {
  if (grid.empty()) throw ParameterError("random search: empty grid");
  HpoResult result;
  if (fixed_trials) {
    if (*fixed_trials < 1) {
      throw ParameterError("random search: fixed trial count must be >= 1");
    }
    result.trials_drawn = *fixed_trials;
  } else if (tnb) {
    Rng count_rng = rng.Split("trial-count");
    result.trials_drawn = tnb->Sample(count_rng);
  } else {
    throw ParameterError("random search: need a TNB or a fixed trial count");
  }

  Rng pick_rng = rng.Split("grid-pick");
  Rng seed_rng = rng.Split("trial-seed");
  for (Index t = 0; t < result.trials_drawn; ++t) {
    TrialRecord rec;
    rec.trial_index = t;
    rec.grid_index = static_cast<Index>(pick_rng.UniformInt(grid.size()));
    rec.point = grid[rec.grid_index];
    rec.seed = seed_rng.UniformInt(std::uint64_t{1} << 31);
    try {
      rec.outcome = objective(rec.point, rec.seed);
      if (!std::isfinite(rec.outcome.objective)) {
        throw std::runtime_error("non-finite objective");
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    result.trials.push_back(std::move(rec));
  }

  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& rec = result.trials[i];
    if (rec.failed) continue;
    if (!result.best_trial ||
        rec.outcome.objective >
            result.trials[*result.best_trial].outcome.objective) {
      result.best_trial = static_cast<Index>(i);
    }
  }
  return result;
}

std::string ToString(ChargePolicy policy) {
  switch (policy) {
    case ChargePolicy::kGridComposition:
      return "grid-composition";
    case ChargePolicy::kSingleRun:
      return "single-run";
  }
  return "unknown";
}

ChargePolicy ParseChargePolicy(const std::string& name) {
  if (name == "grid-composition") return ChargePolicy::kGridComposition;
  if (name == "single-run") return ChargePolicy::kSingleRun;
  throw ParameterError("unknown charge policy '" + name + "'");
}

double DphpoTotalEpsilon(const RdpCurve& per_run, double delta,
                         Index grid_size, ChargePolicy policy) {
  if (grid_size < 1) throw ParameterError("dphpo: grid size must be >= 1");
  switch (policy) {
    case ChargePolicy::kGridComposition:
      return RdpToEpsilon(Compose(per_run, static_cast<double>(grid_size)),
                          delta)
          .epsilon;
    case ChargePolicy::kSingleRun:
      return RdpToEpsilon(per_run, delta).epsilon;
  }
  throw ParameterError("dphpo: unknown policy");
}

double DphpoTotalEpsilon(const MechanismParams& per_run, Index grid_size,
                         ChargePolicy policy) {
  return DphpoTotalEpsilon(Account(per_run), per_run.delta, grid_size, policy);
}

}  // namespace clipbound
