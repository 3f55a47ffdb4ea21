// Copyright 2026 The vacsim Authors
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

#include "vacsim/nn.h"

#include <algorithm>
#include <cmath>

#include "vacsim/common.h"

namespace vacsim::nn {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "network needs >= 2 layer sizes");
  }
  for (int s : sizes_) {
    if (s < 1) throw Error(ErrorCode::kInvalidArgument, "layer size must be >= 1");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_.push_back({Matrix::Zero(sizes_[l + 1], sizes_[l]),
                       Vector::Zero(sizes_[l + 1])});
  }
}

Mlp Mlp::Random(std::vector<int> sizes, std::mt19937_64& rng,
                double hidden_bias_scale) {
  Mlp net(std::move(sizes));
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    auto& layer = net.layers_[l];
    double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill keeps the draw order independent of Eigen's storage.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = dist(rng);
      }
    }
    if (hidden_bias_scale > 0 && l + 1 < net.layers_.size()) {
      std::uniform_real_distribution<double> bias(-hidden_bias_scale,
                                                  hidden_bias_scale);
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = bias(rng);
    }
  }
  return net;
}

void Mlp::CheckInput(Eigen::Index rows) const {
  if (layers_.empty() || rows != sizes_.front()) {
    throw Error(ErrorCode::kInvalidArgument,
                "input has " + std::to_string(rows) + " features, network expects " +
                    std::to_string(sizes_.empty() ? 0 : sizes_.front()));
  }
}

Vector Mlp::Forward(std::span<const double> input) const {
  CheckInput(static_cast<Eigen::Index>(input.size()));
  Vector x = Eigen::Map<const Vector>(input.data(), input.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector z = layers_[l].weights * x + layers_[l].bias;
    x = l + 1 < layers_.size() ? Vector(z.cwiseMax(0.0)) : z;
  }
  return x;
}

Matrix Mlp::ForwardBatch(const Matrix& inputs, ForwardCache* cache) const {
  CheckInput(inputs.rows());
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix x = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weights * x;
    z.colwise() += layers_[l].bias;
    if (cache) {
      cache->inputs.push_back(x);
      cache->pre.push_back(z);
    }
    x = l + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return x;
}

Vector Mlp::ForwardSelected(const Matrix& inputs, std::span<const int> selected,
                            ForwardCache* cache) const {
  CheckInput(inputs.rows());
  if (static_cast<Eigen::Index>(selected.size()) != inputs.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "one selected output per column");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.inputs.clear();
  c.pre.clear();
  Matrix x = inputs;
  const std::size_t last = layers_.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    Matrix z = layers_[l].weights * x;
    z.colwise() += layers_[l].bias;
    c.inputs.push_back(x);
    c.pre.push_back(z);
    x = z.cwiseMax(0.0);
  }
  c.inputs.push_back(x);
  Vector out(inputs.cols());
  for (Eigen::Index b = 0; b < inputs.cols(); ++b) {
    int a = selected[b];
    if (a < 0 || a >= sizes_.back()) {
      throw Error(ErrorCode::kInvalidArgument, "selected output out of range");
    }
    out(b) = layers_[last].weights.row(a).dot(x.col(b)) + layers_[last].bias(a);
  }
  return out;
}

namespace {

// Propagates `delta` (dL/dz of layer l) down through layers l-1 .. 0.
void BackpropHidden(const std::vector<Layer>& layers, const ForwardCache& cache,
                    std::size_t l, Matrix delta, std::vector<Layer>& grads) {
  while (l > 0) {
    Matrix upstream = layers[l].weights.transpose() * delta;
    --l;
    delta = upstream.cwiseProduct(
        (cache.pre[l].array() > 0.0).cast<double>().matrix());
    grads[l].weights.noalias() += delta * cache.inputs[l].transpose();
    grads[l].bias += delta.rowwise().sum();
  }
}

}  // namespace

void Mlp::Backward(const ForwardCache& cache, const Matrix& grad_output,
                   std::vector<Layer>& grads) const {
  std::size_t last = layers_.size() - 1;
  grads[last].weights.noalias() += grad_output * cache.inputs[last].transpose();
  grads[last].bias += grad_output.rowwise().sum();
  BackpropHidden(layers_, cache, last, grad_output, grads);
}

void Mlp::BackwardSelected(const ForwardCache& cache, std::span<const int> selected,
                           std::span<const double> grad_selected,
                           std::vector<Layer>& grads) const {
  std::size_t last = layers_.size() - 1;
  const Matrix& h = cache.inputs[last];
  const Layer& out = layers_[last];
  Eigen::Index batch = h.cols();
  if (last == 0) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      grads[0].weights.row(selected[b]) += grad_selected[b] * h.col(b).transpose();
      grads[0].bias(selected[b]) += grad_selected[b];
    }
    return;
  }
  // dL/dz for the last hidden layer, computed without a dense output gradient.
  Matrix delta(h.rows(), batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    int a = selected[b];
    double g = grad_selected[b];
    grads[last].weights.row(a) += g * h.col(b).transpose();
    grads[last].bias(a) += g;
    delta.col(b) = g * out.weights.row(a).transpose();
  }
  std::size_t l = last - 1;
  delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
  grads[l].weights.noalias() += delta * cache.inputs[l].transpose();
  grads[l].bias += delta.rowwise().sum();
  BackpropHidden(layers_, cache, l, delta, grads);
}

std::vector<Layer> Mlp::ZeroGradients() const {
  std::vector<Layer> grads;
  for (const auto& layer : layers_) {
    grads.push_back({Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                     Vector::Zero(layer.bias.size())});
  }
  return grads;
}

void Mlp::ApplySgd(const std::vector<Layer>& grads, double learning_rate) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weights -= learning_rate * grads[l].weights;
    layers_[l].bias -= learning_rate * grads[l].bias;
  }
}

std::size_t Mlp::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

std::vector<double> FlattenGradients(const std::vector<Layer>& grads) {
  std::vector<double> out;
  for (const auto& layer : grads) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        out.push_back(layer.weights(r, c));
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.push_back(layer.bias(r));
  }
  return out;
}

std::vector<double> Mlp::Flatten() const { return FlattenGradients(layers_); }

void Mlp::Unflatten(std::span<const double> params) {
  if (params.size() != ParameterCount()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter count mismatch");
  }
  std::size_t i = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = params[i++];
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = params[i++];
  }
}

bool Mlp::AllFinite() const {
  for (const auto& layer : layers_) {
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weights != other.layers_[l].weights ||
        layers_[l].bias != other.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate)
    : kind_(kind), learning_rate_(learning_rate) {}

void Optimizer::Step(Mlp& net, const std::vector<Layer>& grads) {
  if (kind_ == OptimizerKind::kSgd) {
    net.ApplySgd(grads, learning_rate_);
    return;
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (first_.empty()) {
    first_ = net.ZeroGradients();
    second_ = net.ZeroGradients();
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    param.array() -= learning_rate_ * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + kEps);
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    update(net.layers()[l].weights, grads[l].weights, first_[l].weights,
           second_[l].weights);
    update(net.layers()[l].bias, grads[l].bias, first_[l].bias, second_[l].bias);
  }
}

void Optimizer::StepSparse(Mlp& net, const std::vector<Layer>& grads,
                           std::span<const int> output_rows) {
  if (kind_ == OptimizerKind::kSgd) {
    net.ApplySgd(grads, learning_rate_);
    return;
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (first_.empty()) {
    first_ = net.ZeroGradients();
    second_ = net.ZeroGradients();
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
  auto update = [&](auto&& param, const auto& g, auto&& m, auto&& v) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    param.array() -= learning_rate_ * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + kEps);
  };
  const std::size_t last = grads.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    update(net.layers()[l].weights, grads[l].weights, first_[l].weights,
           second_[l].weights);
    update(net.layers()[l].bias, grads[l].bias, first_[l].bias, second_[l].bias);
  }
  std::vector<int> rows(output_rows.begin(), output_rows.end());
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  Layer& out = net.layers()[last];
  for (int r : rows) {
    update(out.weights.row(r), grads[last].weights.row(r),
           first_[last].weights.row(r), second_[last].weights.row(r));
    update(out.bias.segment(r, 1), grads[last].bias.segment(r, 1),
           first_[last].bias.segment(r, 1), second_[last].bias.segment(r, 1));
  }
}

}  // namespace vacsim::nn
