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

#include <algorithm>
#include <cmath>
#include <limits>

#include "clipbound/errors.h"

namespace clipbound {
namespace {

double LogSumExp(std::span<const double> terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void MechanismParams::Validate() const {
  if (!(sampling_rate >= 0.0 && sampling_rate <= 1.0)) {
    throw ParameterError("mechanism: sampling rate must lie in [0, 1]");
  }
  if (steps < 1) throw ParameterError("mechanism: steps must be >= 1");
  if (!(sigma_grad > 0.0)) {
    throw ParameterError("mechanism: sigma_grad must be > 0");
  }
  if (sigma_count && !(*sigma_count > 0.0)) {
    throw ParameterError("mechanism: sigma_count must be > 0 when present");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("mechanism: delta must lie in (0, 1)");
  }
}

std::vector<double> DefaultOrders() {
  std::vector<double> orders;
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  orders.push_back(128);
  orders.push_back(256);
  return orders;
}

double CombinedSigma(double sigma_grad, std::optional<double> sigma_count) {
  if (!(sigma_grad > 0.0)) {
    throw ParameterError("combined_sigma: sigma_grad must be > 0");
  }
  if (!sigma_count) return sigma_grad;
  if (!(*sigma_count > 0.0)) {
    throw ParameterError("combined_sigma: sigma_count must be > 0");
  }
  const double ratio = sigma_grad / *sigma_count;
  return sigma_grad / std::sqrt(1.0 + ratio * ratio);
}

double GaussianRdp(double sigma, double order) {
  return order / (2.0 * sigma * sigma);
}

double SubsampledGaussianRdp(double q, double sigma, int order) {
  if (order < 2) {
    throw ParameterError("subsampled_gaussian_rdp: integer order >= 2 required");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ParameterError("subsampled_gaussian_rdp: q must lie in [0, 1]");
  }
  if (!(sigma > 0.0)) {
    throw ParameterError("subsampled_gaussian_rdp: sigma must be > 0");
  }
  if (q == 0.0) return 0.0;
  if (q == 1.0) return GaussianRdp(sigma, order);

  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> terms(order + 1);
  for (int k = 0; k <= order; ++k) {
    terms[k] = LogBinomial(order, k) + (order - k) * log_1mq + k * log_q +
               static_cast<double>(k) * (k - 1) * inv_two_var;
  }
  const double value = LogSumExp(terms) / (order - 1);
  return std::max(0.0, value);
}

RdpCurve Account(const MechanismParams& params,
                 std::span<const double> orders) {
  params.Validate();
  const double sigma = CombinedSigma(params.sigma_grad, params.sigma_count);
  RdpCurve curve;
  curve.reserve(orders.size());
  for (double order : orders) {
    const int a = static_cast<int>(order);
    if (a != order) {
      throw ParameterError("account: only integer orders are supported");
    }
    const double per_step = SubsampledGaussianRdp(params.sampling_rate, sigma, a);
    curve.push_back({order, per_step * static_cast<double>(params.steps)});
  }
  return curve;
}

RdpCurve Account(const MechanismParams& params) {
  const auto orders = DefaultOrders();
  return Account(params, orders);
}

RdpCurve Compose(const RdpCurve& curve, double times) {
  RdpCurve out = curve;
  for (auto& p : out) p.rdp *= times;
  return out;
}

EpsilonResult RdpToEpsilon(const RdpCurve& curve, double delta) {
  if (curve.empty()) throw ParameterError("rdp_to_eps: empty curve");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("rdp_to_eps: delta must lie in (0, 1)");
  }
  const double log_inv_delta = -std::log(delta);
  EpsilonResult best{std::numeric_limits<double>::infinity(), curve[0].order};
  for (const auto& p : curve) {
    const double eps = p.rdp + log_inv_delta / (p.order - 1.0);
    if (eps < best.epsilon) best = {eps, p.order};
  }
  return best;
}

EpsilonResult Epsilon(const MechanismParams& params) {
  return RdpToEpsilon(Account(params), params.delta);
}

double CalibrateSigma(double target_epsilon, double delta, double q,
                      Index steps, double count_ratio) {
  if (!(target_epsilon > 0.0)) {
    throw ParameterError("calibrate_sigma: target epsilon must be > 0");
  }
  if (!(count_ratio >= 0.0)) {
    throw ParameterError("calibrate_sigma: count ratio must be >= 0");
  }
  auto eps_at = [&](double sigma) {
    MechanismParams p{q, steps, sigma, std::nullopt, delta};
    if (count_ratio > 0.0) p.sigma_count = count_ratio * sigma;
    return Epsilon(p).epsilon;
  };

  constexpr double kMaxSigma = 1e6;
  constexpr double kMinSigma = 1e-3;
  double hi = 1.0;
  while (eps_at(hi) > target_epsilon) {
    hi *= 2.0;
    if (hi > kMaxSigma) {
      throw CalibrationError(
          "calibrate_sigma: target epsilon " + std::to_string(target_epsilon) +
          " is not attainable (order grid floor is " +
          std::to_string(eps_at(kMaxSigma)) + ")");
    }
  }
  double lo = hi / 2.0;
  while (eps_at(lo) <= target_epsilon) {
    hi = lo;
    lo /= 2.0;
    if (lo < kMinSigma) return hi;
  }
  // Invariant: eps(lo) > target >= eps(hi).
  while (eps_at(hi) < (1.0 - 1e-3) * target_epsilon && hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (eps_at(mid) > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace clipbound
