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

#include "clipbound/trainer.h"

#include <cmath>
#include <sstream>

#include "clipbound/errors.h"

namespace clipbound {

std::string ToString(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kMomentum:
      return "momentum";
    case OptimizerKind::kAdam:
      return "adam";
  }
  return "unknown";
}

OptimizerKind ParseOptimizerKind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "momentum") return OptimizerKind::kMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ParameterError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(const OptimizerConfig& config, Index dim)
    : config_(config),
      first_(Vector::Zero(dim)),
      second_(Vector::Zero(dim)) {}

void Optimizer::Update(Vector& params, const Vector& grad,
                       double learning_rate) {
  if (params.size() != grad.size() || params.size() != first_.size()) {
    throw ParameterError("optimizer: shape mismatch");
  }
  ++step_;
  switch (config_.kind) {
    case OptimizerKind::kSgd:
      params -= learning_rate * grad;
      break;
    case OptimizerKind::kMomentum:
      first_ = config_.momentum * first_ + grad;
      params -= learning_rate * first_;
      break;
    case OptimizerKind::kAdam: {
      const double b1 = config_.beta1;
      const double b2 = config_.beta2;
      first_ = b1 * first_ + (1.0 - b1) * grad;
      second_ = b2 * second_ + (1.0 - b2) * grad.cwiseAbs2();
      const double t = static_cast<double>(step_);
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      params.array() -= learning_rate * (first_.array() / c1) /
                        ((second_.array() / c2).sqrt() + config_.epsilon);
      break;
    }
  }
}

Index TrainConfig::ResolvedSteps() const {
  if (steps > 0) return steps;
  const double per_epoch = std::ceil(1.0 / sampling_rate);
  return std::max<Index>(1, static_cast<Index>(std::llround(epochs * per_epoch)));
}

void TrainConfig::Validate() const {
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw ParameterError("train: sampling rate must lie in (0, 1]");
  }
  if (steps < 0) throw ParameterError("train: steps must be >= 1");
  if (steps == 0 && !(epochs > 0.0)) {
    throw ParameterError("train: epochs must be > 0");
  }
  if (!(learning_rate > 0.0)) {
    throw ParameterError("train: learning rate must be > 0");
  }
  if (!(sigma_grad >= 0.0) || !(sigma_count >= 0.0)) {
    throw ParameterError("train: noise multipliers must be >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("train: delta must lie in (0, 1)");
  }
  clipping.Validate();
}

MechanismParams MechanismFor(const TrainConfig& config) {
  MechanismParams p;
  p.sampling_rate = config.sampling_rate;
  p.steps = config.ResolvedSteps();
  p.sigma_grad = config.sigma_grad;
  p.delta = config.delta;
  if (config.clipping.mode == ClippingMode::kAdaptive) {
    p.sigma_count = config.sigma_count;
  }
  return p;
}

SensitiveBatch::SensitiveBatch(PerSampleGrads grads, AccessCounts* counts)
    : grads_(std::move(grads)), counts_(counts) {}

Vector SensitiveBatch::ClippedSum(double bound) const {
  ++counts_->clipped_sums;
  Vector weights(size());
  for (Index i = 0; i < size(); ++i) {
    const double n = grads_.norms[i];
    weights[i] = n > 0.0 ? ClipFactor(n, bound) : 0.0;
  }
  return grads_.WeightedSum(weights);
}

Index SensitiveBatch::CountExceeding(double tau, double bound) const {
  ++counts_->exceed_counts;
  return clipbound::CountExceeding(
      std::span<const double>(grads_.norms.data(), grads_.norms.size()), tau,
      bound);
}

double SensitiveBatch::MeanLoss() const {
  ++counts_->diagnostics;
  return size() > 0 ? grads_.losses.mean() : 0.0;
}

std::array<double, 3> SensitiveBatch::NormQuantiles() const {
  ++counts_->diagnostics;
  if (size() == 0) return {0.0, 0.0, 0.0};
  std::vector<double> norms(grads_.norms.data(),
                            grads_.norms.data() + grads_.norms.size());
  const double max = grads_.norms.maxCoeff();
  return {Quantile(norms, 0.5), Quantile(norms, 0.9), max};
}

RunResult Train(const TrainConfig& config, const Dataset& data,
                const ModelSpec& spec, Rng& rng) {
  Rng init_rng = rng.Split("init");
  return TrainFrom(config, data, InitParams(spec, init_rng), rng);
}

RunResult TrainFrom(const TrainConfig& config, const Dataset& data,
                    ModelState initial, Rng& rng,
                    const GradientSource& source) {
  config.Validate();
  if (data.size() == 0) throw ParameterError("train: empty dataset");

  const Index n = data.size();
  const Index steps = config.ResolvedSteps();
  const double expected_batch = config.sampling_rate * static_cast<double>(n);
  const bool adaptive = config.clipping.mode == ClippingMode::kAdaptive;
  const double sigma_grad = config.noiseless ? 0.0 : config.sigma_grad;
  const double sigma_count = config.noiseless ? 0.0 : config.sigma_count;

  RunResult result;
  result.mechanism = MechanismFor(config);
  if (config.noiseless) result.non_private_flags.push_back("noiseless");
  if (sigma_grad == 0.0 && !config.noiseless) {
    result.non_private_flags.push_back("sigma_grad_zero");
  }
  if (adaptive && sigma_count == 0.0 && !config.noiseless) {
    result.non_private_flags.push_back("sigma_count_zero");
  }
  if (config.record_norm_quantiles) {
    result.non_private_flags.push_back("grad_norm_quantiles");
  }

  Rng batch_rng = rng.Split("batch");
  Rng noise_rng = rng.Split("grad-noise");
  Rng count_rng = rng.Split("count-noise");

  ModelState state = std::move(initial);
  Optimizer optimizer(config.optimizer, state.params.size());
  ClippingState clipping(config.clipping);
  result.history.reserve(steps);

  double last_loss = 0.0;
  for (Index t = 0; t < steps; ++t) {
    const std::vector<Index> batch = PoissonSubsample(n, config.sampling_rate,
                                                      batch_rng);
    PerSampleGrads raw;
    if (source) {
      raw = source(state, batch);
    } else if (static_cast<Index>(batch.size()) == n) {
      raw = PerSampleLossGrads(state, data.features, data.labels,
                               GradLayout::kFactored);
    } else {
      const Dataset sub = data.Select(batch);
      raw = PerSampleLossGrads(state, sub.features, sub.labels,
                               GradLayout::kFactored);
    }
    const SensitiveBatch sensitive(std::move(raw), &result.access);

    HistoryRow row;
    row.step = t;
    row.clip_bound = clipping.bound();
    if (sensitive.size() > 0) last_loss = sensitive.MeanLoss();
    row.loss = last_loss;
    if (config.record_norm_quantiles) {
      const auto q = sensitive.NormQuantiles();
      row.grad_norm_p50 = q[0];
      row.grad_norm_p90 = q[1];
      row.grad_norm_max = q[2];
    }

    Vector noisy = sensitive.ClippedSum(clipping.bound());
    if (sigma_grad > 0.0) {
      noisy += GaussianVector(noisy.size(), sigma_grad, noise_rng);
    }
    noisy /= expected_batch;
    optimizer.Update(state.params, noisy, config.learning_rate);

    if (adaptive) {
      const Index exceeding = sensitive.CountExceeding(
          config.clipping.threshold_multiplier, clipping.bound());
      const double fraction =
          PrivatizeCount(exceeding, expected_batch, sigma_count, count_rng);
      row.noisy_clip_fraction = fraction;
      clipping.UpdateBound(fraction, t);
    }
    result.history.push_back(row);

    if (!std::isfinite(row.loss) || row.loss > kDivergenceLoss ||
        !state.params.allFinite()) {
      std::ostringstream msg;
      msg << "training diverged at step " << t << " (loss " << row.loss
          << ")";
      throw TrainingDiverged(msg.str(), std::move(result.history));
    }
  }

  result.final_state = std::move(state);
  result.final_clip_bound = clipping.bound();
  if (result.non_private_flags.empty() ||
      (result.non_private_flags.size() == 1 &&
       result.non_private_flags[0] == "grad_norm_quantiles")) {
    // Norm quantiles are diagnostics outside the released model; the model
    // itself carries the accounted guarantee.
    result.epsilon = Epsilon(result.mechanism);
  }
  return result;
}

}  // namespace clipbound
