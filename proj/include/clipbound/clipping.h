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

#ifndef CLIPBOUND_CLIPPING_H_
#define CLIPBOUND_CLIPPING_H_

#include <span>
#include <string>
#include <vector>

#include "clipbound/errors.h"
#include "clipbound/numkit.h"

namespace clipbound {

enum class ClippingMode { kConstant, kAdaptive };

// Named strategies used by configs and outputs. Unbounded and bounded are
// both kAdaptive; they differ only in the lower bound.
enum class ClippingStrategy { kConstant, kUnbounded, kBounded };

std::string ToString(ClippingStrategy strategy);
ClippingStrategy ParseClippingStrategy(const std::string& name);

struct ClippingConfig {
  ClippingMode mode = ClippingMode::kConstant;
  double initial_bound = 1.0;         // C_0
  double lower_bound = 0.0;           // C_LB; 0 means unbounded
  double target_quantile = 0.5;       // gamma
  double threshold_multiplier = 2.5;  // tau
  double bound_learning_rate = 0.2;   // eta_C

  void Validate() const;

  static ClippingConfig Constant(double bound);
  static ClippingConfig Unbounded(double initial_bound = 1.0);
  static ClippingConfig Bounded(double lower_bound,
                                double initial_bound = 1.0);
  // Constant uses clip_param as C; bounded as C_LB; unbounded as C_0.
  static ClippingConfig ForStrategy(ClippingStrategy strategy,
                                    double clip_param);
};

// min(1/C, 1/||g||); the zero vector takes the 1/C branch.
inline double ClipFactor(double norm, double bound) {
  return norm > bound ? 1.0 / norm : 1.0 / bound;
}

// g * min(1/C, 1/||g||). Output norm is min(||g|| / C, 1).
template <typename Derived>
VectorX<typename Derived::Scalar> ClipNormalize(
    const Eigen::MatrixBase<Derived>& g, typename Derived::Scalar bound) {
  if (!(bound > 0)) throw ParameterError("clip_normalize: bound must be > 0");
  const auto norm = L2Norm(g);
  if (norm == 0) return g;
  return g * static_cast<typename Derived::Scalar>(ClipFactor(norm, bound));
}

// |{i : norms[i] > tau * C}|.
Index CountExceeding(std::span<const double> norms, double tau, double bound);

// (count + N(0, sigma_count^2)) / expected_batch, unclamped.
double PrivatizeCount(Index count, double expected_batch, double sigma_count,
                      Rng& rng);

struct BoundRecord {
  Index step = 0;
  double bound = 0.0;           // C_t used during the step
  double noisy_fraction = 0.0;  // b~_t
};

class ClippingState {
 public:
  explicit ClippingState(const ClippingConfig& config);

  double bound() const { return bound_; }
  const ClippingConfig& config() const { return config_; }
  const std::vector<BoundRecord>& history() const { return history_; }

  // C_{t+1} = max(C_LB, C_t * exp(eta_C * (b~_t - gamma))). Appends
  // (step, C_t, b~_t) to the history and returns C_{t+1}.
  double UpdateBound(double noisy_fraction, Index step);

 private:
  ClippingConfig config_;
  double bound_;
  std::vector<BoundRecord> history_;
};

}  // namespace clipbound

#endif  // CLIPBOUND_CLIPPING_H_
