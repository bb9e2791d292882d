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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "clipbound/datasets.h"
#include "clipbound/trainer.h"

namespace clipbound {
namespace {

TEST(ClipNormalizeTest, BelowAtAndAboveBound) {
  const Vector small{{0.3, 0.4}};  // norm 0.5
  EXPECT_TRUE(ClipNormalize(small, 1.0).isApprox(small));
  EXPECT_NEAR(ClipNormalize(small, 1.0).norm(), 0.5, 1e-15);
  EXPECT_NEAR(ClipNormalize(small, 0.5).norm(), 1.0, 1e-15);
  const Vector big{{3.0, 4.0}};
  const Vector out = ClipNormalize(big, 1.0);
  EXPECT_NEAR(out.norm(), 1.0, 1e-15);
  EXPECT_TRUE(out.isApprox(big / 5.0));
  EXPECT_EQ(ClipNormalize(Vector::Zero(3), 1.0), Vector::Zero(3));
  EXPECT_THROW(ClipNormalize(big, 0.0), ParameterError);
}

TEST(ClipNormalizeTest, NormIsMinRatioOne) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector g = GaussianVector(7, std::exp(rng.Normal(0.0, 2.0)), rng);
    const double c = std::exp(rng.Normal(0.0, 2.0));
    EXPECT_NEAR(ClipNormalize(g, c).norm(), std::min(g.norm() / c, 1.0),
                1e-12);
  }
}

TEST(CountExceedingTest, StrictInequality) {
  const std::vector<double> norms = {0.5, 1.0, 1.5, 2.0, 2.5};
  EXPECT_EQ(CountExceeding(norms, 1.0, 1.0), 3);
  EXPECT_EQ(CountExceeding(norms, 2.0, 1.0), 1);
  EXPECT_EQ(CountExceeding(norms, 2.5, 1.0), 0);
  EXPECT_EQ(CountExceeding({}, 1.0, 1.0), 0);
}

TEST(PrivatizeCountTest, NoiselessAndMoments) {
  Rng rng(2);
  EXPECT_DOUBLE_EQ(PrivatizeCount(30, 100.0, 0.0, rng), 0.3);
  double sum = 0.0, sq = 0.0;
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    const double b = PrivatizeCount(30, 100.0, 10.0, rng);
    sum += b;
    sq += b * b;
  }
  const double mean = sum / m;
  EXPECT_NEAR(mean, 0.3, 4 * 0.1 / std::sqrt(m));
  EXPECT_NEAR(std::sqrt(sq / m - mean * mean), 0.1, 0.005);
  EXPECT_THROW(PrivatizeCount(1, 0.0, 1.0, rng), ParameterError);
}

TEST(ClippingStateTest, GeometricUpdate) {
  ClippingState s(ClippingConfig::Unbounded(1.0));
  const double next = s.UpdateBound(0.7, 0);
  EXPECT_DOUBLE_EQ(next, std::exp(0.2 * (0.7 - 0.5)));
  EXPECT_DOUBLE_EQ(s.bound(), next);
  ASSERT_EQ(s.history().size(), 1u);
  EXPECT_EQ(s.history()[0].bound, 1.0);
  EXPECT_EQ(s.history()[0].noisy_fraction, 0.7);
  // At the target quantile the bound is unchanged.
  EXPECT_DOUBLE_EQ(s.UpdateBound(0.5, 1), next);
}

TEST(ClippingStateTest, LowerBoundHolds) {
  ClippingState s(ClippingConfig::Bounded(0.5, 1.0));
  for (int t = 0; t < 100; ++t) s.UpdateBound(-1.0, t);
  EXPECT_EQ(s.bound(), 0.5);
  ClippingState u(ClippingConfig::Unbounded(1.0));
  for (int t = 0; t < 100; ++t) u.UpdateBound(0.0, t);
  EXPECT_NEAR(u.bound(), std::exp(-0.2 * 0.5 * 100), 1e-15);
}

TEST(ClippingStateTest, ConstantRejectsUpdates) {
  ClippingState s(ClippingConfig::Constant(0.3));
  EXPECT_THROW(s.UpdateBound(1.0, 0), ParameterError);
  EXPECT_EQ(s.bound(), 0.3);
}

TEST(ClippingConfigTest, StrategiesAndValidation) {
  EXPECT_EQ(ClippingConfig::ForStrategy(ClippingStrategy::kConstant, 0.2).mode,
            ClippingMode::kConstant);
  const auto b = ClippingConfig::ForStrategy(ClippingStrategy::kBounded, 0.2);
  EXPECT_EQ(b.mode, ClippingMode::kAdaptive);
  EXPECT_EQ(b.lower_bound, 0.2);
  const auto u = ClippingConfig::ForStrategy(ClippingStrategy::kUnbounded, 0.2);
  EXPECT_EQ(u.lower_bound, 0.0);
  EXPECT_EQ(u.initial_bound, 0.2);
  for (auto st : {ClippingStrategy::kConstant, ClippingStrategy::kUnbounded,
                  ClippingStrategy::kBounded}) {
    EXPECT_EQ(ParseClippingStrategy(ToString(st)), st);
  }
  ClippingConfig bad = ClippingConfig::Unbounded(1.0);
  bad.target_quantile = 1.5;
  EXPECT_THROW(bad.Validate(), ParameterError);
  EXPECT_THROW(ClippingConfig::Constant(0.0).Validate(), ParameterError);
}

// Noiseless full-batch runs on the two-point task: 60% of the mass at 0,
// 40% at 1, true mean 0.4.
RunResult ToyRun(const ClippingConfig& clipping) {
  Rng data_rng(0);
  const Dataset data = GenBimodal(1000, 0.6, 0.0, 1.0, 0.0, data_rng);
  TrainConfig cfg;
  cfg.steps = 5000;
  cfg.sampling_rate = 1.0;
  cfg.learning_rate = 0.002;
  cfg.noiseless = true;
  cfg.record_norm_quantiles = false;
  cfg.clipping = clipping;
  cfg.clipping.threshold_multiplier = 1.0;
  Rng rng(1);
  return Train(cfg, data, {.kind = ModelKind::kMean}, rng);
}

TEST(ToyDynamicsTest, ConstantBoundReachesTrueMean) {
  const RunResult r = ToyRun(ClippingConfig::Constant(1.0));
  EXPECT_NEAR(r.final_state.params[0], 0.4, 1e-3);
}

TEST(ToyDynamicsTest, UnboundedCollapsesToMedian) {
  const RunResult r = ToyRun(ClippingConfig::Unbounded(1.0));
  EXPECT_LT(r.final_clip_bound, 1e-2);
  EXPECT_LT(std::abs(r.final_state.params[0]), 1e-2);
}

TEST(ToyDynamicsTest, SmallLowerBoundSettlesAtTwoThirdsOfIt) {
  // With C pinned at C_LB and mu < C_LB, the 0-mode terms are mu / C_LB and
  // the 1-mode terms are normalized to -1: 0.6 mu / C_LB = 0.4.
  const double lb = 0.1;
  const RunResult r = ToyRun(ClippingConfig::Bounded(lb, 1.0));
  EXPECT_NEAR(r.final_clip_bound, lb, 1e-12);
  EXPECT_NEAR(r.final_state.params[0], 2.0 * lb / 3.0, 1e-3);
}

TEST(ToyDynamicsTest, LargeLowerBoundRecoversTrueMean) {
  const RunResult r = ToyRun(ClippingConfig::Bounded(0.6, 1.0));
  EXPECT_NEAR(r.final_clip_bound, 0.6, 1e-12);
  EXPECT_NEAR(r.final_state.params[0], 0.4, 1e-3);
}

}  // namespace
}  // namespace clipbound
