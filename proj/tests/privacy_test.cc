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

#include "clipbound/privacy.h"

#include <cmath>

#include <gtest/gtest.h>

#include "clipbound/errors.h"
#include "oracles.h"

namespace clipbound {
namespace {

TEST(OrdersTest, Grid) {
  const auto orders = DefaultOrders();
  ASSERT_EQ(orders.size(), 65u);
  EXPECT_EQ(orders.front(), 2.0);
  EXPECT_EQ(orders[62], 64.0);
  EXPECT_EQ(orders[63], 128.0);
  EXPECT_EQ(orders.back(), 256.0);
}

TEST(SubsampledRdpTest, MatchesQuadrature) {
  for (double q : {0.01, 0.1, 0.5}) {
    for (double sigma : {0.8, 1.0, 2.0}) {
      for (int a : {2, 3, 8, 16}) {
        const double lib = SubsampledGaussianRdp(q, sigma, a);
        const double quad = oracle::SubsampledGaussianRdpQuadrature(q, sigma, a);
        EXPECT_NEAR(lib, quad, 1e-4 * quad)
            << "q=" << q << " sigma=" << sigma << " a=" << a;
      }
    }
  }
}

TEST(SubsampledRdpTest, FullSamplingIsGaussian) {
  for (int a : {2, 10, 64}) {
    EXPECT_NEAR(SubsampledGaussianRdp(1.0, 1.5, a), GaussianRdp(1.5, a),
                1e-12 * GaussianRdp(1.5, a));
  }
  EXPECT_EQ(SubsampledGaussianRdp(0.0, 1.0, 4), 0.0);
}

TEST(SubsampledRdpTest, Monotone) {
  for (int a : {2, 5, 32}) {
    EXPECT_LT(SubsampledGaussianRdp(0.01, 1.0, a),
              SubsampledGaussianRdp(0.02, 1.0, a));
    EXPECT_GT(SubsampledGaussianRdp(0.01, 1.0, a),
              SubsampledGaussianRdp(0.01, 1.2, a));
  }
}

TEST(EpsilonTest, GaussianCloseToContinuousOptimum) {
  for (double sigma : {1.0, 2.0, 5.0, 10.0}) {
    const EpsilonResult r =
        Epsilon({.sampling_rate = 1.0, .steps = 1, .sigma_grad = sigma});
    const double exact = oracle::GaussianEpsilonClosedForm(sigma, 1e-5);
    EXPECT_GE(r.epsilon, exact * (1 - 1e-12));
    EXPECT_LE(r.epsilon, exact * 1.05) << "sigma=" << sigma;
  }
}

TEST(EpsilonTest, ConversionFormula) {
  const RdpCurve curve = {{2.0, 1.0}, {3.0, 0.5}, {4.0, 0.4}};
  const EpsilonResult r = RdpToEpsilon(curve, 1e-5);
  const double l = std::log(1e5);
  const double e4 = 0.4 + l / 3.0;
  EXPECT_DOUBLE_EQ(r.epsilon, std::min({1.0 + l, 0.5 + l / 2.0, e4}));
  EXPECT_EQ(r.order, 4.0);
}

TEST(EpsilonTest, MonotoneInStepsRateAndNoise) {
  MechanismParams base{.sampling_rate = 0.01, .steps = 1000, .sigma_grad = 1.0};
  const double e = Epsilon(base).epsilon;
  auto more_steps = base;
  more_steps.steps = 2000;
  auto more_q = base;
  more_q.sampling_rate = 0.02;
  auto more_noise = base;
  more_noise.sigma_grad = 1.5;
  EXPECT_GT(Epsilon(more_steps).epsilon, e);
  EXPECT_GT(Epsilon(more_q).epsilon, e);
  EXPECT_LT(Epsilon(more_noise).epsilon, e);
}

TEST(CompositionTest, LinearInSteps) {
  const MechanismParams one{.sampling_rate = 0.05, .steps = 1, .sigma_grad = 1.1};
  auto many = one;
  many.steps = 37;
  const RdpCurve a = Compose(Account(one), 37);
  const RdpCurve b = Account(many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].rdp, b[i].rdp, 1e-12 * b[i].rdp);
  }
}

TEST(CombinedSigmaTest, TwoQueriesAsOne) {
  const double s1 = 1.3, s2 = 13.0;
  const double c = CombinedSigma(s1, s2);
  EXPECT_NEAR(c, 1.0 / std::sqrt(1.0 / (s1 * s1) + 1.0 / (s2 * s2)), 1e-15);
  // Composed Gaussian RDP of both releases equals a single release at c.
  for (double a : {2.0, 7.0, 100.0}) {
    EXPECT_NEAR(GaussianRdp(s1, a) + GaussianRdp(s2, a), GaussianRdp(c, a),
                1e-12 * GaussianRdp(c, a));
  }
  EXPECT_EQ(CombinedSigma(s1, std::nullopt), s1);
  EXPECT_LT(c, s1);
}

TEST(CombinedSigmaTest, AccountantUsesIt) {
  for (double q : {0.01, 1.0}) {
    for (double s : {0.7, 1.0, 4.0}) {
      for (double ratio : {2.0, 10.0}) {
        const MechanismParams both{.sampling_rate = q, .steps = 100,
                                   .sigma_grad = s, .sigma_count = ratio * s};
        const MechanismParams single{
            .sampling_rate = q, .steps = 100,
            .sigma_grad = s / std::sqrt(1.0 + 1.0 / (ratio * ratio))};
        const auto a = Account(both), b = Account(single);
        for (std::size_t i = 0; i < a.size(); ++i) {
          EXPECT_NEAR(a[i].rdp, b[i].rdp, 1e-12 * b[i].rdp);
        }
        EXPECT_GT(Epsilon(both).epsilon,
                  Epsilon({.sampling_rate = q, .steps = 100, .sigma_grad = s})
                      .epsilon);
      }
    }
  }
}

TEST(CalibrateTest, MeetsTargetTightly) {
  for (double target : {0.5, 2.0, 8.0}) {
    for (double ratio : {0.0, 10.0}) {
      const double s = CalibrateSigma(target, 1e-5, 0.01, 2000, ratio);
      std::optional<double> count;
      if (ratio > 0) count = ratio * s;
      const MechanismParams p{.sampling_rate = 0.01, .steps = 2000,
                              .sigma_grad = s, .sigma_count = count};
      const double e = Epsilon(p).epsilon;
      EXPECT_LE(e, target);
      EXPECT_GE(e, target * (1 - 2e-3));
    }
  }
}

TEST(CalibrateTest, Unreachable) {
  EXPECT_THROW(CalibrateSigma(1e-9, 1e-5, 1.0, 1, 0.0), CalibrationError);
  EXPECT_THROW(CalibrateSigma(-1.0, 1e-5, 1.0, 1, 0.0), ParameterError);
}

TEST(MechanismParamsTest, Validation) {
  EXPECT_THROW((MechanismParams{.sampling_rate = 1.5}).Validate(),
               ParameterError);
  EXPECT_THROW((MechanismParams{.sigma_grad = 0.0}).Validate(), ParameterError);
  EXPECT_THROW((MechanismParams{.delta = 0.0}).Validate(), ParameterError);
}

}  // namespace
}  // namespace clipbound
