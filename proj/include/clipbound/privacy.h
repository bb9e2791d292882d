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

#ifndef CLIPBOUND_PRIVACY_H_
#define CLIPBOUND_PRIVACY_H_

#include <optional>
#include <span>
#include <vector>

#include "clipbound/numkit.h"

namespace clipbound {

inline constexpr double kDefaultDelta = 1e-5;
// sigma_count / sigma_grad used by the adaptive-clipping experiments.
inline constexpr double kDefaultCountRatio = 10.0;

// Parameters of T Poisson-subsampled steps, each releasing a Gaussian
// gradient sum (sensitivity 1) and, if sigma_count is set, a Gaussian count
// (sensitivity 1).
struct MechanismParams {
  double sampling_rate = 1.0;  // q
  Index steps = 1;             // T
  double sigma_grad = 1.0;
  std::optional<double> sigma_count;
  double delta = kDefaultDelta;

  void Validate() const;
};

struct RdpPoint {
  double order;
  double rdp;
};

// Ordered by increasing order; values finite and >= 0.
using RdpCurve = std::vector<RdpPoint>;

// Integers 2..64 followed by 128 and 256.
std::vector<double> DefaultOrders();

// Noise multiplier of the single Gaussian mechanism equivalent to releasing
// both queries: (s1^-2 + s2^-2)^(-1/2). Evaluated as
// s1 / sqrt(1 + (s1 / s2)^2); a missing second query returns s1.
double CombinedSigma(double sigma_grad, std::optional<double> sigma_count);

// alpha / (2 sigma^2).
double GaussianRdp(double sigma, double order);

// Integer-order RDP of the Poisson-subsampled Gaussian mechanism:
//   1/(a-1) * log sum_k C(a,k) (1-q)^(a-k) q^k exp(k(k-1) / (2 sigma^2)),
// evaluated with log-sum-exp.
double SubsampledGaussianRdp(double q, double sigma, int order);

// T times the per-step curve at CombinedSigma(sigma_grad, sigma_count).
RdpCurve Account(const MechanismParams& params,
                 std::span<const double> orders);
RdpCurve Account(const MechanismParams& params);

// Pointwise multiple of a curve (RDP composition of identical mechanisms).
RdpCurve Compose(const RdpCurve& curve, double times);

struct EpsilonResult {
  double epsilon;
  double order;
};

// min over orders of rdp + log(1/delta) / (order - 1).
EpsilonResult RdpToEpsilon(const RdpCurve& curve, double delta);

// Epsilon of `params` via Account + RdpToEpsilon.
EpsilonResult Epsilon(const MechanismParams& params);

// Smallest sigma_grad (to relative tolerance 1e-3 in epsilon) whose
// mechanism, with sigma_count = count_ratio * sigma_grad (no count query
// when count_ratio == 0), spends at most target_epsilon. Throws
// CalibrationError when the target is below what the order grid can
// certify.
double CalibrateSigma(double target_epsilon, double delta, double q,
                      Index steps, double count_ratio);

}  // namespace clipbound

#endif  // CLIPBOUND_PRIVACY_H_
