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

// Reference computations used by the tests. Each one avoids the code path
// it checks: quadrature instead of binomial expansion, finite differences
// instead of backpropagation, direct products instead of recurrences.

#ifndef CLIPBOUND_TESTS_ORACLES_H_
#define CLIPBOUND_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "clipbound/models.h"

namespace clipbound::oracle {

// Renyi divergence of order alpha between the Poisson-subsampled Gaussian
// mixture (1-q) N(0, s^2) + q N(1, s^2) and N(0, s^2):
//   1/(alpha-1) log E_{z~N(0,s^2)} [ ((1-q) + q exp((2z-1)/(2s^2)))^alpha ].
inline double SubsampledGaussianRdpQuadrature(double q, double sigma,
                                              double alpha) {
  const double s2 = sigma * sigma;
  auto integrand = [&](double z) {
    // Log space: the density underflows where the ratio power overflows.
    const double log_density =
        -z * z / (2.0 * s2) - 0.5 * std::log(2.0 * M_PI * s2);
    const double a = std::log1p(-q);
    const double b = std::log(q) + (2.0 * z - 1.0) / (2.0 * s2);
    const double log_ratio =
        std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
    return std::exp(log_density + alpha * log_ratio);
  };
  const double lim = 40.0 * sigma + 10.0;
  const double moment =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, -lim, lim, 15, 1e-14);
  return std::log(moment) / (alpha - 1.0);
}

// Optimal continuous-order conversion for the plain Gaussian mechanism
// (rdp(a) = a / (2 s^2)): minimizing a/(2s^2) + log(1/d)/(a-1) over a > 1.
inline double GaussianEpsilonClosedForm(double sigma, double delta) {
  return 1.0 / (2.0 * sigma * sigma) +
         std::sqrt(2.0 * std::log(1.0 / delta)) / sigma;
}

// Central differences of the single-sample loss.
inline Vector FiniteDifferenceGrad(const ModelState& state, const Matrix& x,
                                   int label, double step = 1e-6) {
  ModelState s = state;
  const std::vector<int> y = {label};
  Vector g(s.params.size());
  for (Index j = 0; j < s.params.size(); ++j) {
    const double keep = s.params[j];
    s.params[j] = keep + step;
    const double up = BatchLoss(s, x, y);
    s.params[j] = keep - step;
    const double down = BatchLoss(s, x, y);
    s.params[j] = keep;
    g[j] = (up - down) / (2.0 * step);
  }
  return g;
}

// Truncated negative binomial pmf by the direct product formula.
inline double TnbPmfDirect(double eta, double gamma, long k) {
  if (eta == 0.0) {
    return std::pow(1.0 - gamma, k) / (k * std::log(1.0 / gamma));
  }
  double prod = 1.0;
  for (long l = 0; l < k; ++l) prod *= (l + eta) / (l + 1.0);
  return std::pow(1.0 - gamma, k) / (std::pow(gamma, -eta) - 1.0) * prod;
}

// Pearson chi-square p-value for observed counts against expected counts.
// Bins with expected < 5 are merged into their neighbour first.
inline double ChiSquarePValue(const std::vector<double>& observed,
                              const std::vector<double>& expected) {
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_e += expected[i];
    if (acc_e >= 5.0) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0) {
    if (e.empty()) return 1.0;
    o.back() += acc_o;
    e.back() += acc_e;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  }
  if (o.size() < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(o.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace clipbound::oracle

#endif  // CLIPBOUND_TESTS_ORACLES_H_
