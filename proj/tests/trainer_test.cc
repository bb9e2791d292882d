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

#include <gtest/gtest.h>

#include "clipbound/datasets.h"
#include "clipbound/errors.h"

namespace clipbound {
namespace {

Dataset Points(std::vector<double> xs) {
  Dataset ds;
  ds.features.resize(static_cast<Index>(xs.size()), 1);
  for (Index i = 0; i < ds.size(); ++i) ds.features(i, 0) = xs[i];
  ds.labels.assign(xs.size(), 0);
  ds.num_classes = 1;
  return ds;
}

const ModelSpec kMean{.kind = ModelKind::kMean};

TrainConfig Base() {
  TrainConfig c;
  c.steps = 1;
  c.sampling_rate = 1.0;
  c.learning_rate = 0.5;
  c.noiseless = true;
  c.clipping = ClippingConfig::Constant(1.0);
  return c;
}

TEST(TrainConfigTest, ResolvedSteps) {
  TrainConfig c;
  c.epochs = 3;
  c.sampling_rate = 0.3;  // ceil(1/q) = 4
  EXPECT_EQ(c.ResolvedSteps(), 12);
  c.steps = 7;
  EXPECT_EQ(c.ResolvedSteps(), 7);
  c.sampling_rate = 0.0;
  EXPECT_THROW(c.Validate(), ParameterError);
}

TEST(SgdTest, OneStepByHand) {
  // mu0 = 0; gradients mu - x = {-0.5, -3}; clipped at C = 1: {-0.5, -1}.
  const Dataset data = Points({0.5, 3.0});
  Rng rng(1);
  const RunResult r = TrainFrom(Base(), data, {kMean, Vector::Zero(1)}, rng);
  EXPECT_DOUBLE_EQ(r.final_state.params[0], -0.5 * (-1.5) / 2.0);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_DOUBLE_EQ(r.history[0].loss, 0.5 * (0.25 + 9.0) / 2.0);
  EXPECT_EQ(r.history[0].clip_bound, 1.0);
  EXPECT_FALSE(r.history[0].noisy_clip_fraction.has_value());
  EXPECT_DOUBLE_EQ(r.history[0].grad_norm_max, 3.0);
  EXPECT_FALSE(r.epsilon.has_value());
}

TEST(SgdTest, SmallBoundNormalizesEverySample) {
  // With C below every norm, each clipped term is a unit vector.
  const Dataset data = Points({2.0, 3.0, -4.0});
  TrainConfig c = Base();
  c.clipping = ClippingConfig::Constant(0.01);
  Rng rng(1);
  const RunResult r = TrainFrom(c, data, {kMean, Vector::Zero(1)}, rng);
  EXPECT_DOUBLE_EQ(r.final_state.params[0], -0.5 * (-1.0 - 1.0 + 1.0) / 3.0);
}

TEST(OptimizerTest, MomentumWithZeroBetaIsSgd) {
  Rng drng(2);
  const Dataset data = GenBimodal(200, 0.6, 0.0, 1.0, 0.05, drng);
  TrainConfig sgd = Base();
  sgd.steps = 50;
  sgd.sampling_rate = 0.3;
  sgd.noiseless = false;
  sgd.sigma_grad = 0.7;
  TrainConfig mom = sgd;
  mom.optimizer.kind = OptimizerKind::kMomentum;
  mom.optimizer.momentum = 0.0;
  Rng r1(3), r2(3);
  EXPECT_EQ(Train(sgd, data, kMean, r1).final_state.params,
            Train(mom, data, kMean, r2).final_state.params);
}

TEST(OptimizerTest, MomentumAccumulates) {
  Optimizer opt({.kind = OptimizerKind::kMomentum, .momentum = 0.5}, 1);
  Vector p = Vector::Zero(1);
  const Vector g = Vector::Ones(1);
  opt.Update(p, g, 1.0);
  EXPECT_DOUBLE_EQ(p[0], -1.0);
  opt.Update(p, g, 1.0);
  EXPECT_DOUBLE_EQ(p[0], -2.5);
}

TEST(OptimizerTest, AdamFirstStepIsSignStep) {
  Optimizer opt({.kind = OptimizerKind::kAdam}, 3);
  Vector p = Vector::Zero(3);
  opt.Update(p, Vector{{2.0, -0.001, 50.0}}, 0.1);
  EXPECT_NEAR(p[0], -0.1, 1e-6);
  EXPECT_NEAR(p[1], 0.1, 1e-4);
  EXPECT_NEAR(p[2], -0.1, 1e-6);
  EXPECT_THROW(opt.Update(p, Vector::Zero(2), 0.1), ParameterError);
}

TEST(OptimizerKindTest, RoundTrip) {
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kMomentum,
                 OptimizerKind::kAdam}) {
    EXPECT_EQ(ParseOptimizerKind(ToString(k)), k);
  }
  EXPECT_THROW(ParseOptimizerKind("lbfgs"), ParameterError);
}

TEST(NoiseTest, ScaleOfPrivatizedUpdate) {
  // Zero gradients: the whole update is lr * N(0, sigma^2 I) / B.
  const Index dim = 20000;
  Dataset data = Points({0.0, 0.0, 0.0, 0.0});
  ModelState start{kMean, Vector::Zero(1)};
  TrainConfig c = Base();
  c.noiseless = false;
  c.sigma_grad = 3.0;
  const GradientSource zeros = [dim](const ModelState&,
                                     const std::vector<Index>& batch) {
    PerSampleGrads g;
    const Index n = static_cast<Index>(batch.size());
    g.losses = Vector::Zero(n);
    g.grads = Matrix::Zero(n, dim);
    g.norms = Vector::Zero(n);
    g.dim = dim;
    return g;
  };
  start.params = Vector::Zero(dim);
  start.spec.kind = ModelKind::kMean;
  // The source sets the shape; the model spec is not consulted for it.
  Rng rng(4);
  const RunResult r = TrainFrom(c, data, start, rng, zeros);
  const Vector& p = r.final_state.params;
  const double expected = c.learning_rate * 3.0 / 4.0;
  const double sd = std::sqrt(p.squaredNorm() / dim);
  EXPECT_NEAR(sd, expected, 4.0 * expected / std::sqrt(2.0 * dim));
  EXPECT_NEAR(p.mean(), 0.0, 4.0 * expected / std::sqrt(dim));
}

TEST(AccessTest, ConstantModeMakesNoCountQueries) {
  Rng drng(5);
  const Dataset data = GenBimodal(100, 0.6, 0.0, 1.0, 0.05, drng);
  TrainConfig c = Base();
  c.steps = 30;
  c.sampling_rate = 0.2;
  c.record_norm_quantiles = false;
  Rng rng(6);
  RunResult r = Train(c, data, kMean, rng);
  EXPECT_EQ(r.access.clipped_sums, 30);
  EXPECT_EQ(r.access.exceed_counts, 0);
  EXPECT_EQ(r.access.diagnostics, 30);  // the reported mean loss
  EXPECT_FALSE(MechanismFor(c).sigma_count.has_value());

  c.clipping = ClippingConfig::Bounded(0.1);
  c.record_norm_quantiles = true;
  Rng rng2(6);
  r = Train(c, data, kMean, rng2);
  EXPECT_EQ(r.access.clipped_sums, 30);
  EXPECT_EQ(r.access.exceed_counts, 30);
  EXPECT_EQ(r.access.diagnostics, 60);  // loss and norm quantiles
  for (const auto& row : r.history) {
    EXPECT_TRUE(row.noisy_clip_fraction.has_value());
  }
}

TEST(PrivacyTest, LedgerAndEpsilon) {
  Rng drng(7);
  const Dataset data = GenBimodal(1000, 0.6, 0.0, 1.0, 0.05, drng);
  TrainConfig c = Base();
  c.steps = 20;
  c.sampling_rate = 0.05;
  c.noiseless = false;
  c.sigma_grad = 1.0;
  c.sigma_count = 10.0;
  c.clipping = ClippingConfig::Bounded(0.1);
  c.record_norm_quantiles = false;
  Rng rng(8);
  const RunResult r = Train(c, data, kMean, rng);
  ASSERT_TRUE(r.epsilon.has_value());
  EXPECT_TRUE(r.non_private_flags.empty());
  EXPECT_EQ(r.epsilon->epsilon, Epsilon(MechanismFor(c)).epsilon);
  EXPECT_EQ(r.mechanism.sigma_count, 10.0);
  EXPECT_EQ(r.mechanism.steps, 20);

  c.sigma_count = 0.0;
  Rng rng2(8);
  const RunResult open = Train(c, data, kMean, rng2);
  EXPECT_FALSE(open.epsilon.has_value());
  EXPECT_EQ(open.non_private_flags, std::vector<std::string>{"sigma_count_zero"});
}

TEST(EmptyBatchTest, CarriesLossAndStaysFinite) {
  const Dataset data = Points({1.0, 2.0, 3.0});
  TrainConfig c = Base();
  c.steps = 200;
  c.sampling_rate = 0.05;
  c.noiseless = false;
  c.sigma_grad = 0.5;
  c.sigma_count = 5.0;
  c.clipping = ClippingConfig::Bounded(0.1);
  Rng rng(9);
  const RunResult r = Train(c, data, kMean, rng);
  EXPECT_TRUE(r.final_state.params.allFinite());
  int empty = 0;
  for (std::size_t t = 1; t < r.history.size(); ++t) {
    if (r.history[t].grad_norm_max == 0.0) {
      ++empty;
      EXPECT_EQ(r.history[t].loss, r.history[t - 1].loss);
    }
  }
  EXPECT_GT(empty, 100);
}

TEST(DeterminismTest, SameSeedSameRun) {
  Rng drng(10);
  const Dataset data = GenSkewedClassification(50, 3, 2, 0.2, 3.0, 4, drng);
  const ModelSpec spec{.kind = ModelKind::kMlp, .input_dim = 4,
                       .num_classes = 3, .hidden = 8};
  TrainConfig c = Base();
  c.steps = 40;
  c.sampling_rate = 0.2;
  c.noiseless = false;
  c.sigma_grad = 1.0;
  c.sigma_count = 10.0;
  c.clipping = ClippingConfig::Bounded(0.05);
  Rng a(11), b(11), other(12);
  const RunResult ra = Train(c, data, spec, a);
  const RunResult rb = Train(c, data, spec, b);
  EXPECT_EQ(ra.final_state.params, rb.final_state.params);
  EXPECT_EQ(ra.final_clip_bound, rb.final_clip_bound);
  EXPECT_NE(ra.final_state.params, Train(c, data, spec, other).final_state.params);
}

TEST(OptimizerSwapTest, BoundTrajectoryDependsOnlyOnGradients) {
  // Replayed per-sample gradients that ignore the parameters: C_t sees the
  // same norms whatever the optimizer does with the noisy sum.
  const Index n = 64, dim = 5;
  Rng grng(13);
  Matrix table(n, dim);
  for (Index i = 0; i < n; ++i) {
    table.row(i) = GaussianVector(dim, std::exp(grng.Normal(0, 1)), grng);
  }
  const GradientSource replay = [&](const ModelState&,
                                    const std::vector<Index>& batch) {
    PerSampleGrads g;
    const Index m = static_cast<Index>(batch.size());
    g.grads.resize(m, dim);
    for (Index i = 0; i < m; ++i) g.grads.row(i) = table.row(batch[i]);
    g.losses = Vector::Zero(m);
    g.norms = g.grads.rowwise().norm();
    g.dim = dim;
    return g;
  };
  Dataset data = Points(std::vector<double>(n, 0.0));
  TrainConfig c = Base();
  c.steps = 100;
  c.sampling_rate = 0.25;
  c.noiseless = false;
  c.sigma_grad = 1.0;
  c.sigma_count = 10.0;
  c.clipping = ClippingConfig::Bounded(0.05);
  std::vector<std::vector<double>> bounds;
  std::vector<Vector> finals;
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kMomentum,
                    OptimizerKind::kAdam}) {
    c.optimizer.kind = kind;
    Rng rng(14);
    const RunResult r =
        TrainFrom(c, data, {kMean, Vector::Zero(dim)}, rng, replay);
    std::vector<double> b;
    for (const auto& row : r.history) b.push_back(row.clip_bound);
    bounds.push_back(b);
    finals.push_back(r.final_state.params);
  }
  EXPECT_EQ(bounds[0], bounds[1]);
  EXPECT_EQ(bounds[0], bounds[2]);
  EXPECT_NE(finals[0], finals[2]);
}

TEST(DivergenceTest, Throws) {
  Dataset data = Points({1.0});
  TrainConfig c = Base();
  c.steps = 5;
  const GradientSource blowup = [](const ModelState&,
                                   const std::vector<Index>& batch) {
    PerSampleGrads g;
    const Index m = static_cast<Index>(batch.size());
    g.losses = Vector::Constant(m, 1e7);
    g.grads = Matrix::Ones(m, 1);
    g.norms = Vector::Ones(m);
    g.dim = 1;
    return g;
  };
  Rng rng(15);
  try {
    TrainFrom(c, data, {kMean, Vector::Zero(1)}, rng, blowup);
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.history().size(), 1u);
  }
}

}  // namespace
}  // namespace clipbound
