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

#include "clipbound/models.h"

#include <algorithm>
#include <cmath>

#include "clipbound/errors.h"

namespace clipbound {
namespace {

using ConstMatMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;

struct LinearView {
  ConstMatMap weights;
  ConstVecMap bias;
};

LinearView ViewLinear(const double* p, Index out, Index in) {
  return {ConstMatMap(p, out, in), ConstVecMap(p + out * in, out)};
}

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Row-wise softmax probabilities and per-row cross-entropy.
void SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels,
                         Matrix* probs, Vector* losses) {
  const Index n = logits.rows();
  probs->resize(n, logits.cols());
  losses->resize(n);
  for (Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - m).exp();
    const double z = shifted.sum();
    probs->row(i) = shifted / z;
    if (!labels.empty()) {
      (*losses)[i] = std::log(z) + m - logits(i, labels[i]);
    }
  }
}

void CheckBatch(const ModelState& state, const Matrix& features,
                std::span<const int> labels, bool need_labels) {
  const ModelSpec& spec = state.spec;
  if (state.params.size() != spec.ParameterCount()) {
    throw ParameterError("model: parameter vector length mismatch");
  }
  if (features.cols() != spec.input_dim) {
    throw ParameterError("model: batch feature dim " +
                         std::to_string(features.cols()) + " != spec dim " +
                         std::to_string(spec.input_dim));
  }
  if (need_labels && spec.kind != ModelKind::kMean) {
    if (static_cast<Index>(labels.size()) != features.rows()) {
      throw ParameterError("model: labels length != batch rows");
    }
    for (int y : labels) {
      if (y < 0 || y >= spec.num_classes) {
        throw ParameterError("model: label outside [0, K)");
      }
    }
  }
}

struct MlpForward {
  Matrix pre;     // n x h
  Matrix hidden;  // n x h, ReLU(pre)
  Matrix logits;  // n x K
};

MlpForward ForwardMlp(const ModelSpec& spec, const Vector& params,
                      const Matrix& x) {
  const Index d = spec.input_dim;
  const Index h = spec.hidden;
  const Index k = spec.num_classes;
  const LinearView l1 = ViewLinear(params.data(), h, d);
  const LinearView l2 = ViewLinear(params.data() + h * d + h, k, h);
  MlpForward f;
  f.pre = (x * l1.weights.transpose()).rowwise() + l1.bias.transpose();
  f.hidden = f.pre.cwiseMax(0.0);
  f.logits = (f.hidden * l2.weights.transpose()).rowwise() + l2.bias.transpose();
  return f;
}

Matrix LinearLogits(const ModelSpec& spec, const Vector& params,
                    const Matrix& x) {
  const LinearView l = ViewLinear(params.data(), spec.num_classes,
                                  spec.input_dim);
  return (x * l.weights.transpose()).rowwise() + l.bias.transpose();
}

}  // namespace

std::string ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMean:
      return "mean";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kSoftmax:
      return "softmax";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "mean") return ModelKind::kMean;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "softmax") return ModelKind::kSoftmax;
  if (name == "mlp") return ModelKind::kMlp;
  throw ParameterError("unknown model kind '" + name + "'");
}

void ModelSpec::Validate() const {
  if (input_dim < 1) throw ParameterError("model spec: input_dim must be >= 1");
  switch (kind) {
    case ModelKind::kMean:
      if (input_dim != 1) {
        throw ParameterError("model spec: mean model takes 1-d input");
      }
      break;
    case ModelKind::kLogistic:
      if (num_classes != 2) {
        throw ParameterError("model spec: logistic model is binary (K = 2)");
      }
      break;
    case ModelKind::kSoftmax:
      if (num_classes < 2) throw ParameterError("model spec: need K >= 2");
      break;
    case ModelKind::kMlp:
      if (num_classes < 2) throw ParameterError("model spec: need K >= 2");
      if (hidden < 1) throw ParameterError("model spec: mlp requires h >= 1");
      break;
  }
}

Index ModelSpec::ParameterCount() const {
  switch (kind) {
    case ModelKind::kMean:
      return 1;
    case ModelKind::kLogistic:
      return input_dim + 1;
    case ModelKind::kSoftmax:
      return num_classes * input_dim + num_classes;
    case ModelKind::kMlp:
      return hidden * input_dim + hidden + num_classes * hidden + num_classes;
  }
  return 0;
}

ModelState InitParams(const ModelSpec& spec, Rng& rng) {
  spec.Validate();
  ModelState state{spec, Vector::Zero(spec.ParameterCount())};
  auto fill_uniform = [&rng](double* p, Index count, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = 0; i < count; ++i) {
      p[i] = (2.0 * rng.Uniform() - 1.0) * bound;
    }
  };
  double* p = state.params.data();
  switch (spec.kind) {
    case ModelKind::kMean:
      break;
    case ModelKind::kLogistic:
      fill_uniform(p, spec.input_dim, spec.input_dim);
      break;
    case ModelKind::kSoftmax:
      fill_uniform(p, spec.num_classes * spec.input_dim, spec.input_dim);
      break;
    case ModelKind::kMlp: {
      const Index w1 = spec.hidden * spec.input_dim;
      fill_uniform(p, w1, spec.input_dim);
      fill_uniform(p + w1 + spec.hidden, spec.num_classes * spec.hidden,
                   spec.hidden);
      break;
    }
  }
  return state;
}

Vector PerSampleGrads::WeightedSum(const Vector& weights) const {
  if (weights.size() != size()) {
    throw ParameterError("weighted_sum: one weight per sample required");
  }
  if (!factored()) return grads.transpose() * weights;
  Vector out = Vector::Zero(dim);
  for (const OuterBlock& b : blocks) {
    const Index a = b.left.cols();
    if (b.right.cols() == 0) {
      out.segment(b.offset, a) = b.left.transpose() * weights;
    } else {
      Eigen::Map<Matrix>(out.data() + b.offset, a, b.right.cols()).noalias() =
          b.left.transpose() *
          (b.right.array().colwise() * weights.array()).matrix();
    }
  }
  return out;
}

Matrix PerSampleGrads::Dense() const {
  if (!factored()) return grads;
  Matrix out = Matrix::Zero(size(), dim);
  for (Index i = 0; i < size(); ++i) {
    double* g = out.row(i).data();
    for (const OuterBlock& b : blocks) {
      const Index a = b.left.cols();
      if (b.right.cols() == 0) {
        Eigen::Map<Vector>(g + b.offset, a) = b.left.row(i).transpose();
      } else {
        Eigen::Map<Matrix>(g + b.offset, a, b.right.cols()).noalias() =
            b.left.row(i).transpose() * b.right.row(i);
      }
    }
  }
  return out;
}

namespace {

Vector FactoredNorms(const std::vector<OuterBlock>& blocks, Index n) {
  Vector sq = Vector::Zero(n);
  for (const OuterBlock& b : blocks) {
    const Vector l = b.left.rowwise().squaredNorm();
    if (b.right.cols() == 0) {
      sq += l;
    } else {
      sq += l.cwiseProduct(b.right.rowwise().squaredNorm());
    }
  }
  return sq.cwiseSqrt();
}

}  // namespace

PerSampleGrads PerSampleLossGrads(const ModelState& state,
                                  const Matrix& features,
                                  std::span<const int> labels,
                                  GradLayout layout) {
  CheckBatch(state, features, labels, /*need_labels=*/true);
  const ModelSpec& spec = state.spec;
  const Index n = features.rows();
  const Index d = spec.input_dim;
  PerSampleGrads out;
  out.dim = spec.ParameterCount();
  const bool factored = layout == GradLayout::kFactored &&
                        (spec.kind == ModelKind::kSoftmax ||
                         spec.kind == ModelKind::kMlp);
  out.grads.resize(n, factored ? 0 : out.dim);

  switch (spec.kind) {
    case ModelKind::kMean: {
      const double mu = state.params[0];
      const auto residual = mu - features.col(0).array();
      out.grads.col(0) = residual;
      out.losses = 0.5 * residual.square();
      break;
    }
    case ModelKind::kLogistic: {
      const auto w = state.params.head(d);
      const double b = state.params[d];
      const Vector z = (features * w).array() + b;
      out.losses.resize(n);
      for (Index i = 0; i < n; ++i) {
        const double y = labels[i];
        out.losses[i] = Softplus(z[i]) - y * z[i];
        const double residual = Sigmoid(z[i]) - y;
        out.grads.row(i).head(d) = residual * features.row(i);
        out.grads(i, d) = residual;
      }
      break;
    }
    case ModelKind::kSoftmax: {
      const Index k = spec.num_classes;
      Matrix probs;
      SoftmaxCrossEntropy(LinearLogits(spec, state.params, features), labels,
                          &probs, &out.losses);
      for (Index i = 0; i < n; ++i) probs(i, labels[i]) -= 1.0;
      if (factored) {
        out.blocks.push_back({0, probs, features});
        out.blocks.push_back({k * d, probs, Matrix(n, 0)});
        break;
      }
      for (Index i = 0; i < n; ++i) {
        double* g = out.grads.row(i).data();
        Eigen::Map<Matrix>(g, k, d).noalias() =
            probs.row(i).transpose() * features.row(i);
        Eigen::Map<Vector>(g + k * d, k) = probs.row(i).transpose();
      }
      break;
    }
    case ModelKind::kMlp: {
      const Index h = spec.hidden;
      const Index k = spec.num_classes;
      const MlpForward f = ForwardMlp(spec, state.params, features);
      Matrix delta2;
      SoftmaxCrossEntropy(f.logits, labels, &delta2, &out.losses);
      for (Index i = 0; i < n; ++i) delta2(i, labels[i]) -= 1.0;
      const ConstMatMap w2(state.params.data() + h * d + h, k, h);
      const Matrix delta1 =
          ((delta2 * w2).array() * (f.pre.array() > 0.0).cast<double>())
              .matrix();
      const Index off_b1 = h * d;
      const Index off_w2 = off_b1 + h;
      const Index off_b2 = off_w2 + k * h;
      if (factored) {
        out.blocks.push_back({0, delta1, features});
        out.blocks.push_back({off_b1, delta1, Matrix(n, 0)});
        out.blocks.push_back({off_w2, delta2, f.hidden});
        out.blocks.push_back({off_b2, delta2, Matrix(n, 0)});
        break;
      }
      for (Index i = 0; i < n; ++i) {
        double* g = out.grads.row(i).data();
        Eigen::Map<Matrix>(g, h, d).noalias() =
            delta1.row(i).transpose() * features.row(i);
        Eigen::Map<Vector>(g + off_b1, h) = delta1.row(i).transpose();
        Eigen::Map<Matrix>(g + off_w2, k, h).noalias() =
            delta2.row(i).transpose() * f.hidden.row(i);
        Eigen::Map<Vector>(g + off_b2, k) = delta2.row(i).transpose();
      }
      break;
    }
  }
  out.norms = factored ? FactoredNorms(out.blocks, n)
                       : Vector(out.grads.rowwise().norm());
  return out;
}

double BatchLoss(const ModelState& state, const Matrix& features,
                 std::span<const int> labels) {
  CheckBatch(state, features, labels, /*need_labels=*/true);
  const Index n = features.rows();
  if (n == 0) return 0.0;
  const ModelSpec& spec = state.spec;
  switch (spec.kind) {
    case ModelKind::kMean:
      return 0.5 * (state.params[0] - features.col(0).array()).square().mean();
    case ModelKind::kLogistic: {
      const Index d = spec.input_dim;
      const Vector z =
          (features * state.params.head(d)).array() + state.params[d];
      double total = 0.0;
      for (Index i = 0; i < n; ++i) total += Softplus(z[i]) - labels[i] * z[i];
      return total / static_cast<double>(n);
    }
    case ModelKind::kSoftmax:
    case ModelKind::kMlp: {
      const Matrix logits =
          spec.kind == ModelKind::kSoftmax
              ? LinearLogits(spec, state.params, features)
              : ForwardMlp(spec, state.params, features).logits;
      Matrix probs;
      Vector losses;
      SoftmaxCrossEntropy(logits, labels, &probs, &losses);
      return losses.mean();
    }
  }
  return 0.0;
}

Predictions Predict(const ModelState& state, const Matrix& features) {
  CheckBatch(state, features, {}, /*need_labels=*/false);
  const ModelSpec& spec = state.spec;
  const Index n = features.rows();
  Predictions out;
  if (spec.kind == ModelKind::kMean) {
    out.values = Vector::Constant(n, state.params[0]);
    out.probabilities.resize(n, 0);
    return out;
  }
  out.labels.resize(n);
  if (spec.kind == ModelKind::kLogistic) {
    const Index d = spec.input_dim;
    const Vector z =
        (features * state.params.head(d)).array() + state.params[d];
    out.probabilities.resize(n, 2);
    for (Index i = 0; i < n; ++i) {
      const double p = Sigmoid(z[i]);
      out.probabilities(i, 0) = 1.0 - p;
      out.probabilities(i, 1) = p;
      out.labels[i] = p >= 0.5 ? 1 : 0;
    }
    return out;
  }
  const Matrix logits = spec.kind == ModelKind::kSoftmax
                            ? LinearLogits(spec, state.params, features)
                            : ForwardMlp(spec, state.params, features).logits;
  Vector unused;
  SoftmaxCrossEntropy(logits, {}, &out.probabilities, &unused);
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    // maxCoeff returns the first maximum, which is the lowest-index tie rule.
    logits.row(i).maxCoeff(&best);
    out.labels[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace clipbound
