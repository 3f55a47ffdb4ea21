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

#ifndef VACSIM_NN_H_
#define VACSIM_NN_H_

#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vacsim::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

// Per-layer activations kept by a forward pass for backpropagation.
// Columns are batch entries.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer (post-activation)
  std::vector<Matrix> pre;     // pre-activation of each layer
};

// Fully connected feed-forward net: rectifier on hidden layers, identity on the
// output layer.
class Mlp {
 public:
  Mlp() = default;
  // All parameters zero.
  explicit Mlp(std::vector<int> sizes);
  // He-uniform weights. Hidden biases are uniform in +-hidden_bias_scale so
  // that rectifier kinks fall inside the unit input box; output biases are 0.
  static Mlp Random(std::vector<int> sizes, std::mt19937_64& rng,
                    double hidden_bias_scale = 0.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Vector Forward(std::span<const double> input) const;
  // inputs: input_size x batch.
  Matrix ForwardBatch(const Matrix& inputs, ForwardCache* cache = nullptr) const;

  // Runs every layer but the last and returns, for each batch entry b, only
  // output `selected[b]`. The cache is valid for BackwardSelected.
  Vector ForwardSelected(const Matrix& inputs, std::span<const int> selected,
                         ForwardCache* cache) const;

  // Accumulates dL/dtheta for a dense upstream gradient (output_size x batch).
  void Backward(const ForwardCache& cache, const Matrix& grad_output,
                std::vector<Layer>& grads) const;
  // Same, when only output `selected[b]` of batch entry b carries gradient
  // `grad_selected[b]`.
  void BackwardSelected(const ForwardCache& cache, std::span<const int> selected,
                        std::span<const double> grad_selected,
                        std::vector<Layer>& grads) const;

  std::vector<Layer> ZeroGradients() const;
  void ApplySgd(const std::vector<Layer>& grads, double learning_rate);

  std::size_t ParameterCount() const;
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> params);
  bool AllFinite() const;

  bool operator==(const Mlp& other) const;

 private:
  void CheckInput(Eigen::Index rows) const;

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

enum class OptimizerKind { kSgd, kAdam };

// First-order optimizer over an Mlp's parameters. Adam keeps per-parameter
// first/second moment estimates (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);

  void Step(Mlp& net, const std::vector<Layer>& grads);
  // As Step, but for the output layer only rows listed in `output_rows` are
  // touched (lazy moments). Other rows keep their parameters and moments.
  void StepSparse(Mlp& net, const std::vector<Layer>& grads,
                  std::span<const int> output_rows);
  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double lr) { learning_rate_ = lr; }

 private:
  OptimizerKind kind_;
  double learning_rate_;
  long long steps_ = 0;
  std::vector<Layer> first_;
  std::vector<Layer> second_;
};

std::vector<double> FlattenGradients(const std::vector<Layer>& grads);

}  // namespace vacsim::nn

#endif  // VACSIM_NN_H_
