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

#ifndef CLIPBOUND_NUMKIT_H_
#define CLIPBOUND_NUMKIT_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace clipbound {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row-major so that one sample (or one per-sample gradient) is a contiguous
// row.
template <typename Scalar>
using MatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

// Deterministic, seedable generator. A generator is owned by one thread;
// parallel work gets its own stream through Split().
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Child stream derived from (seed, label). The parent stream is not
  // advanced, so Split("a") is the same generator no matter when it is called.
  Rng Split(std::string_view label) const;
  Rng Split(std::uint64_t index) const;

  double Normal(double mean, double std);
  double Uniform();  // [0, 1)
  std::uint64_t UniformInt(std::uint64_t upper);  // [0, upper)

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// i.i.d. N(0, std^2) entries. std = 0 gives the zero vector.
Vector GaussianVector(Index dim, double std, Rng& rng);

// Each index of {0, ..., n-1} kept independently with probability q, returned
// in increasing order.
std::vector<Index> PoissonSubsample(Index n, double q, Rng& rng);

template <typename Derived>
typename Derived::Scalar L2Norm(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) return typename Derived::Scalar(0);
  return v.norm();
}

// True iff every entry is finite.
template <typename Derived>
bool AllFinite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

// Linear-interpolated quantile (p in [0, 1]) of an unsorted sample.
double Quantile(std::vector<double> values, double p);

}  // namespace clipbound

#endif  // CLIPBOUND_NUMKIT_H_
