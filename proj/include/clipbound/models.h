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

#ifndef CLIPBOUND_MODELS_H_
#define CLIPBOUND_MODELS_H_

#include <span>
#include <string>
#include <vector>

#include "clipbound/numkit.h"

namespace clipbound {

enum class ModelKind {
  kMean,      // scalar location estimate, loss 0.5 * (x - mu)^2
  kLogistic,  // binary, sigmoid + cross-entropy
  kSoftmax,   // multiclass linear, softmax + cross-entropy
  kMlp,       // one ReLU hidden layer, softmax + cross-entropy
};

std::string ToString(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::kMean;
  Index input_dim = 1;
  int num_classes = 2;
  Index hidden = 0;  // kMlp only

  void Validate() const;
  Index ParameterCount() const;
};

// Parameter layout (row-major blocks, in order):
//   mean:     [mu]
//   logistic: [w (d), b]
//   softmax:  [W (K x d), b (K)]
//   mlp:      [W1 (h x d), b1 (h), W2 (K x h), b2 (K)]
struct ModelState {
  ModelSpec spec;
  Vector params;
};

// Mean model starts at 0; weights uniform in +-1/sqrt(fan_in); biases 0.
ModelState InitParams(const ModelSpec& spec, Rng& rng);

// One parameter block's gradient for every sample, as an outer product:
// sample i contributes left.row(i)^T * right.row(i), flattened row-major at
// `offset`. Bias blocks have a zero-column `right` and contribute
// left.row(i).
struct OuterBlock {
  Index offset = 0;
  Matrix left;
  Matrix right;
};

// kDense fills `grads`; kFactored keeps per-layer factors instead, which is
// much cheaper for wide layers and large batches.
enum class GradLayout { kDense, kFactored };

// Row i of `grads` is dloss_i / dtheta for sample i.
struct PerSampleGrads {
  Vector losses;
  Matrix grads;  // n x P (n x 0 when factored)
  Vector norms;
  std::vector<OuterBlock> blocks;  // factored layout only
  Index dim = 0;                   // P

  Index size() const { return losses.size(); }
  bool factored() const { return !blocks.empty(); }
  // sum_i w_i * g_i.
  Vector WeightedSum(const Vector& weights) const;
  // n x P in either layout.
  Matrix Dense() const;
};

// Softmax and MLP honour `layout`; the mean and logistic models are always
// dense.
PerSampleGrads PerSampleLossGrads(const ModelState& state,
                                  const Matrix& features,
                                  std::span<const int> labels,
                                  GradLayout layout = GradLayout::kDense);

// Mean of per-sample losses, without building the gradient matrix.
double BatchLoss(const ModelState& state, const Matrix& features,
                 std::span<const int> labels);

struct Predictions {
  std::vector<int> labels;  // empty for the mean model
  Matrix probabilities;     // n x K; n x 0 for the mean model
  Vector values;            // mean model: mu for every row
};

// Argmax with ties to the lowest index; binary logistic predicts class 1 at
// p >= 0.5.
Predictions Predict(const ModelState& state, const Matrix& features);

}  // namespace clipbound

#endif  // CLIPBOUND_MODELS_H_
