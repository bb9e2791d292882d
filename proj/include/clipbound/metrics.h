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

#ifndef CLIPBOUND_METRICS_H_
#define CLIPBOUND_METRICS_H_

#include <span>
#include <vector>

#include "clipbound/numkit.h"

namespace clipbound {

// matrix(true, predicted) tallies over K classes.
struct ConfusionCounts {
  int num_classes = 0;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> matrix;

  Index TruePositives(int k) const { return matrix(k, k); }
  Index ClassTotal(int k) const { return matrix.row(k).sum(); }
  Index Total() const { return matrix.sum(); }
};

ConfusionCounts CountConfusion(std::span<const int> predictions,
                               std::span<const int> labels, int num_classes);

// (1/K) sum_k TP_k / N_k. Throws MetricError naming the first empty class.
double MacroAccuracy(const ConfusionCounts& counts);

// sum_k TP_k / sum_k N_k.
double MicroAccuracy(const ConfusionCounts& counts);

struct WorstClass {
  double accuracy;
  int class_index;  // lowest index among ties
};

WorstClass WorstClassAccuracy(const ConfusionCounts& counts);

// Accuracy restricted to each group id in [0, num_groups).
std::vector<double> GroupAccuracy(std::span<const int> predictions,
                                  std::span<const int> labels,
                                  std::span<const int> groups, int num_groups);

}  // namespace clipbound

#endif  // CLIPBOUND_METRICS_H_
