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

#ifndef VACSIM_AGENTS_H_
#define VACSIM_AGENTS_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "vacsim/env.h"
#include "vacsim/nn.h"

namespace vacsim::agents {

using env::Observation;
using DaySet = std::vector<std::vector<env::StateContext>>;

struct Transition {
  Observation state{};
  int action = 0;
  double reward = 0.0;
  Observation next_state{};
  bool terminal = false;
};

// Fixed-capacity ring of transitions with uniform sampling without
// replacement inside a batch.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void Add(const Transition& t);
  std::vector<Transition> Sample(std::size_t n);
  std::vector<std::size_t> SampleIndices(std::size_t n);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
  std::mt19937_64 rng_;
};

struct DqnConfig {
  double discount_gamma = 0.99;
  double epsilon = 0.10;
  double learning_rate = 1e-3;
  int batch = 64;
  int target_sync_every = 500;
  int episodes = 20000;
  std::size_t buffer_capacity = 50'000;
  std::vector<int> hidden = {64, 64};
  double hidden_bias_scale = 1.0;
  // Output-layer bias at initialization; an optimistic start makes the greedy
  // policy sweep untried actions.
  double initial_q = 10.0;
  // Adam touches only the output rows of the sampled actions.
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;

  void Validate() const;
};

struct A2cConfig {
  // Probability of replacing the softmax draw with a uniform action.
  double exploration = 0.40;
  // With entropy weight tau the regularized optimum is pi ~ exp(Q / tau),
  // whose mode is the greedy action.
  double entropy_weight = 0.1;
  double discount = 0.99;
  double actor_learning_rate = 0.2;
  double critic_learning_rate = 0.01;
  int rollout_length = 5;
  int episodes = 60000;
  std::vector<int> hidden = {64, 64};
  double hidden_bias_scale = 1.0;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kSgd;
  // Learning rates decay linearly to zero over the run when set.
  bool linear_decay = true;

  void Validate() const;
};

enum class PolicyKind { kDqn, kActorCritic };
std::string ToString(PolicyKind kind);
PolicyKind ParsePolicyKind(const std::string& text);

struct PolicyArtifact {
  PolicyKind kind = PolicyKind::kDqn;
  // Q-network for DQN, policy (logit) network for actor-critic.
  nn::Mlp network;
  std::optional<nn::Mlp> critic;
  env::FeatureScaling scaling;
  int bucket_size = 0;
  // Epsilon (DQN) or uniform-mixing weight (actor-critic) of the behavior
  // policy.
  double exploration = 0.0;
  std::vector<double> reward_curve;
  std::uint64_t seed = 0;

  bool operator==(const PolicyArtifact&) const = default;
};

// Greedy action: argmax of the network output, ties to the smallest index.
int GreedyAction(const PolicyArtifact& policy, const Observation& obs);
int Argmax(const nn::Vector& values);

// Exact probability of `action` under the behavior policy.
double BehaviorProbability(const PolicyArtifact& policy, const Observation& obs,
                           int action);

struct SampledAction {
  int action = 0;
  double probability = 1.0;
};
SampledAction SampleBehavior(const PolicyArtifact& policy, const Observation& obs,
                             std::mt19937_64& rng);

// Numerically stable softmax.
nn::Vector Softmax(const nn::Vector& logits);

// y = r for terminal transitions, r + gamma * max_a' Q_target(s', a') otherwise.
double TdTarget(const Transition& t, const nn::Mlp& target_net, double gamma);

// Mean squared TD error over the batch, and its gradient w.r.t. `net`.
double DqnLoss(const nn::Mlp& net, const nn::Mlp& target_net,
               std::span<const Transition> batch, double gamma);
double DqnLossAndGradient(const nn::Mlp& net, const nn::Mlp& target_net,
                          std::span<const Transition> batch, double gamma,
                          std::vector<nn::Layer>& grads);

// One SGD step on the batch. Throws kDivergence on a non-finite loss.
double DqnUpdate(nn::Mlp& net, const nn::Mlp& target_net,
                 std::span<const Transition> batch, const DqnConfig& config);

PolicyArtifact TrainDqn(const DaySet& days, const env::EnvConfig& env_config,
                        const DqnConfig& config, std::uint64_t seed);

// One actor-critic rollout segment.
struct Rollout {
  std::vector<Observation> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  // Value estimate of the state after the segment (0 when it ended the
  // episode).
  double bootstrap_value = 0.0;
};

// Discounted n-step returns of a rollout.
std::vector<double> NStepReturns(const Rollout& rollout, double discount);

// Actor loss: -mean(A_t * log mu(a_t|s_t)) - entropy_weight * mean(H(pi(.|s_t)))
// where mu = (1 - exploration) * pi + exploration / n is the behavior policy
// and A_t = G_t - V(s_t) is treated as a constant.
double ActorLossAndGradient(const nn::Mlp& actor, const Rollout& rollout,
                            std::span<const double> advantages,
                            double entropy_weight, double exploration,
                            std::vector<nn::Layer>* grads);
// Critic loss: mean((G_t - V(s_t))^2).
double CriticLossAndGradient(const nn::Mlp& critic, const Rollout& rollout,
                             std::span<const double> returns,
                             std::vector<nn::Layer>* grads);

PolicyArtifact TrainActorCritic(const DaySet& days,
                                const env::EnvConfig& env_config,
                                const A2cConfig& config, std::uint64_t seed);

// Versioned JSON document.
nlohmann::json ToJson(const PolicyArtifact& policy);
PolicyArtifact PolicyFromJson(const nlohmann::json& doc);
nlohmann::json NetworkToJson(const nn::Mlp& net);
nn::Mlp NetworkFromJson(const nlohmann::json& doc);
nlohmann::json ScalingToJson(const env::FeatureScaling& scaling);
env::FeatureScaling ScalingFromJson(const nlohmann::json& doc);

}  // namespace vacsim::agents

#endif  // VACSIM_AGENTS_H_
