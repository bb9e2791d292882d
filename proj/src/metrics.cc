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

#include "clipbound/metrics.h"

#include <string>

#include "clipbound/errors.h"

namespace clipbound {
namespace {

void RequireNonEmptyClasses(const ConfusionCounts& counts) {
  if (counts.num_classes == 0) throw MetricError("metric: no classes");
  for (int k = 0; k < counts.num_classes; ++k) {
    if (counts.ClassTotal(k) == 0) {
      throw MetricError("metric: class " + std::to_string(k) +
                        " has no samples");
    }
  }
}

double ClassAccuracy(const ConfusionCounts& counts, int k) {
  return static_cast<double>(counts.TruePositives(k)) /
         static_cast<double>(counts.ClassTotal(k));
}

}  // namespace

ConfusionCounts CountConfusion(std::span<const int> predictions,
                               std::span<const int> labels, int num_classes) {
  if (predictions.size() != labels.size()) {
    throw ParameterError("confusion: predictions and labels differ in length");
  }
  if (num_classes < 1) throw ParameterError("confusion: need K >= 1");
  ConfusionCounts c;
  c.num_classes = num_classes;
  c.matrix.setZero(num_classes, num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || y >= num_classes || p < 0 || p >= num_classes) {
      throw ParameterError("confusion: label or prediction outside [0, K)");
    }
    ++c.matrix(y, p);
  }
  return c;
}

double MacroAccuracy(const ConfusionCounts& counts) {
  RequireNonEmptyClasses(counts);
  double sum = 0.0;
  for (int k = 0; k < counts.num_classes; ++k) sum += ClassAccuracy(counts, k);
  return sum / counts.num_classes;
}

double MicroAccuracy(const ConfusionCounts& counts) {
  const Index total = counts.Total();
  if (total == 0) throw MetricError("metric: no samples");
  return static_cast<double>(counts.matrix.diagonal().sum()) /
         static_cast<double>(total);
}

WorstClass WorstClassAccuracy(const ConfusionCounts& counts) {
  RequireNonEmptyClasses(counts);
  WorstClass worst{ClassAccuracy(counts, 0), 0};
  for (int k = 1; k < counts.num_classes; ++k) {
    const double acc = ClassAccuracy(counts, k);
    if (acc < worst.accuracy) worst = {acc, k};
  }
  return worst;
}

std::vector<double> GroupAccuracy(std::span<const int> predictions,
                                  std::span<const int> labels,
                                  std::span<const int> groups,
                                  int num_groups) {
  if (predictions.size() != labels.size() || groups.size() != labels.size()) {
    throw ParameterError("group_accuracy: input lengths differ");
  }
  if (num_groups < 1) throw ParameterError("group_accuracy: no groups");
  std::vector<Index> correct(num_groups, 0);
  std::vector<Index> total(num_groups, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int g = groups[i];
    if (g < 0 || g >= num_groups) {
      throw ParameterError("group_accuracy: group id outside range");
    }
    ++total[g];
    if (predictions[i] == labels[i]) ++correct[g];
  }
  std::vector<double> out(num_groups);
  for (int g = 0; g < num_groups; ++g) {
    if (total[g] == 0) {
      throw MetricError("group_accuracy: group " + std::to_string(g) +
                        " has no samples");
    }
    out[g] = static_cast<double>(correct[g]) / static_cast<double>(total[g]);
  }
  return out;
}

}  // namespace clipbound
