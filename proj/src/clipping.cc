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

#include "clipbound/clipping.h"

#include <algorithm>
#include <cmath>

namespace clipbound {

std::string ToString(ClippingStrategy strategy) {
  switch (strategy) {
    case ClippingStrategy::kConstant:
      return "constant";
    case ClippingStrategy::kUnbounded:
      return "unbounded";
    case ClippingStrategy::kBounded:
      return "bounded";
  }
  return "unknown";
}

ClippingStrategy ParseClippingStrategy(const std::string& name) {
  if (name == "constant") return ClippingStrategy::kConstant;
  if (name == "unbounded") return ClippingStrategy::kUnbounded;
  if (name == "bounded") return ClippingStrategy::kBounded;
  throw ParameterError("unknown clipping strategy '" + name + "'");
}

void ClippingConfig::Validate() const {
  if (!(initial_bound > 0.0) || !std::isfinite(initial_bound)) {
    throw ParameterError("clipping: initial bound must be finite and > 0");
  }
  if (mode == ClippingMode::kConstant) return;
  if (!(lower_bound >= 0.0)) {
    throw ParameterError("clipping: lower bound must be >= 0");
  }
  if (lower_bound > initial_bound) {
    throw ParameterError("clipping: lower bound exceeds initial bound");
  }
  if (!(target_quantile > 0.0 && target_quantile < 1.0)) {
    throw ParameterError("clipping: target quantile must lie in (0, 1)");
  }
  if (!(threshold_multiplier > 0.0)) {
    throw ParameterError("clipping: threshold multiplier must be > 0");
  }
  if (!(bound_learning_rate > 0.0)) {
    throw ParameterError("clipping: bound learning rate must be > 0");
  }
}

ClippingConfig ClippingConfig::Constant(double bound) {
  ClippingConfig c;
  c.mode = ClippingMode::kConstant;
  c.initial_bound = bound;
  return c;
}

ClippingConfig ClippingConfig::Unbounded(double initial_bound) {
  ClippingConfig c;
  c.mode = ClippingMode::kAdaptive;
  c.initial_bound = initial_bound;
  c.lower_bound = 0.0;
  return c;
}

ClippingConfig ClippingConfig::Bounded(double lower_bound,
                                       double initial_bound) {
  ClippingConfig c = Unbounded(initial_bound);
  c.lower_bound = lower_bound;
  // C_0 below the floor would start outside the feasible range.
  c.initial_bound = std::max(initial_bound, lower_bound);
  return c;
}

ClippingConfig ClippingConfig::ForStrategy(ClippingStrategy strategy,
                                           double clip_param) {
  switch (strategy) {
    case ClippingStrategy::kConstant:
      return Constant(clip_param);
    case ClippingStrategy::kUnbounded:
      return Unbounded(clip_param);
    case ClippingStrategy::kBounded:
      return Bounded(clip_param);
  }
  return Constant(clip_param);
}

Index CountExceeding(std::span<const double> norms, double tau, double bound) {
  const double threshold = tau * bound;
  return static_cast<Index>(
      std::count_if(norms.begin(), norms.end(),
                    [threshold](double n) { return n > threshold; }));
}

double PrivatizeCount(Index count, double expected_batch, double sigma_count,
                      Rng& rng) {
  if (!(expected_batch > 0.0)) {
    throw ParameterError("privatize_count: expected batch size must be > 0");
  }
  if (!(sigma_count >= 0.0)) {
    throw ParameterError("privatize_count: sigma_count must be >= 0");
  }
  const double noise = sigma_count > 0.0 ? rng.Normal(0.0, sigma_count) : 0.0;
  return (static_cast<double>(count) + noise) / expected_batch;
}

ClippingState::ClippingState(const ClippingConfig& config)
    : config_(config), bound_(config.initial_bound) {
  config_.Validate();
}

double ClippingState::UpdateBound(double noisy_fraction, Index step) {
  if (config_.mode != ClippingMode::kAdaptive) {
    throw ParameterError("update_bound: clipping is not adaptive");
  }
  history_.push_back({step, bound_, noisy_fraction});
  const double next =
      bound_ * std::exp(config_.bound_learning_rate *
                        (noisy_fraction - config_.target_quantile));
  bound_ = std::max(config_.lower_bound, next);
  return bound_;
}

}  // namespace clipbound
