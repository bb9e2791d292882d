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

#include "clipbound/numkit.h"

#include <algorithm>
#include <string>

#include "clipbound/errors.h"

namespace clipbound {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(SplitMix64(seed)) {}

Rng Rng::Split(std::string_view label) const {
  return Rng(SplitMix64(seed_ ^ SplitMix64(Fnv1a(label))));
}

Rng Rng::Split(std::uint64_t index) const {
  return Split("#" + std::to_string(index));
}

double Rng::Normal(double mean, double std) {
  std::normal_distribution<double> dist(mean, std);
  return dist(engine_);
}

double Rng::Uniform() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::uint64_t Rng::UniformInt(std::uint64_t upper) {
  if (upper == 0) throw ParameterError("uniform_int: empty range");
  std::uniform_int_distribution<std::uint64_t> dist(0, upper - 1);
  return dist(engine_);
}

Vector GaussianVector(Index dim, double std, Rng& rng) {
  if (!(std >= 0.0) || !std::isfinite(std)) {
    throw ParameterError("gaussian_vector: std must be finite and >= 0");
  }
  if (dim < 0) throw ParameterError("gaussian_vector: negative dimension");
  Vector out = Vector::Zero(dim);
  if (std == 0.0) return out;
  std::normal_distribution<double> dist(0.0, std);
  for (Index i = 0; i < dim; ++i) out[i] = dist(rng.engine());
  return out;
}

std::vector<Index> PoissonSubsample(Index n, double q, Rng& rng) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ParameterError("poisson_subsample: rate must lie in [0, 1]");
  }
  std::vector<Index> out;
  if (q == 0.0 || n <= 0) return out;
  if (q == 1.0) {
    out.resize(n);
    for (Index i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  out.reserve(static_cast<std::size_t>(n * q * 1.1) + 16);
  for (Index i = 0; i < n; ++i) {
    if (rng.Uniform() < q) out.push_back(i);
  }
  return out;
}

double Quantile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  p = std::clamp(p, 0.0, 1.0);
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double lo_value = values[lo];
  if (hi == lo) return lo_value;
  const double hi_value =
      *std::min_element(values.begin() + lo + 1, values.end());
  return lo_value + (pos - static_cast<double>(lo)) * (hi_value - lo_value);
}

}  // namespace clipbound
