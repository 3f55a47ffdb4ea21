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

#include "vacsim/agents.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace vacsim::agents {
namespace {

nn::Matrix StackObservations(std::span<const Observation> obs) {
  nn::Matrix m(env::kNumFeatures, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t b = 0; b < obs.size(); ++b) {
    for (int j = 0; j < env::kNumFeatures; ++j) m(j, b) = obs[b][j];
  }
  return m;
}

double MaxOutput(const nn::Mlp& net, const Observation& obs) {
  return net.Forward(obs).maxCoeff();
}

void RequireDays(const DaySet& days, const env::EnvConfig& env_config) {
  if (days.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no training days");
  }
  for (const auto& day : days) {
    if (static_cast<int>(day.size()) != env_config.recipients_per_day) {
      throw Error(ErrorCode::kInvalidArgument,
                  "training day with wrong recipient count");
    }
  }
}

std::vector<int> LayerSizes(const std::vector<int>& hidden, int outputs) {
  std::vector<int> sizes = {env::kNumFeatures};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  return sizes;
}

int UniformAction(int n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

int SampleCategorical(const nn::Vector& probs, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

double Entropy(const nn::Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0) h -= p(i) * std::log(p(i));
  }
  return h;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidArgument, "replay capacity must be > 0");
  }
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::Add(const Transition& t) {
  if (items_.size() < capacity_) {
    items_.push_back(t);
  } else {
    items_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::SampleIndices(std::size_t n) {
  if (n > items_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sample larger than buffer");
  }
  // Floyd's algorithm: n distinct indices, each subset equally likely.
  std::vector<std::size_t> out;
  std::unordered_set<std::size_t> chosen;
  const std::size_t size = items_.size();
  for (std::size_t j = size - n; j < size; ++j) {
    std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng_);
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

std::vector<Transition> ReplayBuffer::Sample(std::size_t n) {
  std::vector<Transition> out;
  for (std::size_t i : SampleIndices(n)) out.push_back(items_[i]);
  return out;
}

void DqnConfig::Validate() const {
  if (!(discount_gamma >= 0 && discount_gamma <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "discount must lie in [0, 1]");
  }
  if (!(epsilon >= 0 && epsilon <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [0, 1]");
  }
  if (!(learning_rate > 0) || batch < 1 || target_sync_every < 1 ||
      episodes < 1 || buffer_capacity < static_cast<std::size_t>(batch)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid DQN configuration");
  }
}

void A2cConfig::Validate() const {
  if (!(exploration >= 0 && exploration <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "exploration must lie in [0, 1]");
  }
  if (!(discount >= 0 && discount <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "discount must lie in [0, 1]");
  }
  if (!(actor_learning_rate > 0) || !(critic_learning_rate > 0) ||
      !(entropy_weight >= 0) || rollout_length < 1 || episodes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid actor-critic configuration");
  }
}

std::string ToString(PolicyKind kind) {
  return kind == PolicyKind::kDqn ? "dqn" : "actor-critic";
}

PolicyKind ParsePolicyKind(const std::string& text) {
  if (text == "dqn") return PolicyKind::kDqn;
  if (text == "actor-critic" || text == "a2c" || text == "acktr") {
    return PolicyKind::kActorCritic;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown agent kind '" + text + "'");
}

int Argmax(const nn::Vector& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return static_cast<int>(best);
}

nn::Vector Softmax(const nn::Vector& logits) {
  nn::Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

int GreedyAction(const PolicyArtifact& policy, const Observation& obs) {
  return Argmax(policy.network.Forward(obs));
}

double BehaviorProbability(const PolicyArtifact& policy, const Observation& obs,
                           int action) {
  const int n = policy.network.output_size();
  const double eps = policy.exploration;
  nn::Vector out = policy.network.Forward(obs);
  if (policy.kind == PolicyKind::kDqn) {
    return eps / n + (action == Argmax(out) ? 1.0 - eps : 0.0);
  }
  return (1.0 - eps) * Softmax(out)(action) + eps / n;
}

SampledAction SampleBehavior(const PolicyArtifact& policy, const Observation& obs,
                             std::mt19937_64& rng) {
  const int n = policy.network.output_size();
  const double eps = policy.exploration;
  nn::Vector out = policy.network.Forward(obs);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool explore = unit(rng) < eps;
  SampledAction s;
  if (policy.kind == PolicyKind::kDqn) {
    int greedy = Argmax(out);
    s.action = explore ? UniformAction(n, rng) : greedy;
    s.probability = eps / n + (s.action == greedy ? 1.0 - eps : 0.0);
  } else {
    nn::Vector pi = Softmax(out);
    s.action = explore ? UniformAction(n, rng) : SampleCategorical(pi, rng);
    s.probability = (1.0 - eps) * pi(s.action) + eps / n;
  }
  return s;
}

double TdTarget(const Transition& t, const nn::Mlp& target_net, double gamma) {
  if (t.terminal || gamma == 0.0) return t.reward;
  return t.reward + gamma * MaxOutput(target_net, t.next_state);
}

namespace {

double LossAndGradientWithTargets(const nn::Mlp& net,
                                  std::span<const Transition> batch,
                                  std::span<const double> targets,
                                  std::vector<nn::Layer>* grads) {
  std::vector<Observation> states;
  std::vector<int> actions;
  for (const auto& t : batch) {
    states.push_back(t.state);
    actions.push_back(t.action);
  }
  nn::ForwardCache cache;
  nn::Vector q = net.ForwardSelected(StackObservations(states), actions, &cache);
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<double> dq(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    double err = q(b) - targets[b];
    loss += err * err / n;
    dq[b] = 2.0 * err / n;
  }
  if (grads) net.BackwardSelected(cache, actions, dq, *grads);
  return loss;
}

std::vector<double> Targets(std::span<const Transition> batch,
                            const nn::Mlp& target_net, double gamma) {
  std::vector<double> y;
  for (const auto& t : batch) y.push_back(TdTarget(t, target_net, gamma));
  return y;
}

}  // namespace

double DqnLoss(const nn::Mlp& net, const nn::Mlp& target_net,
               std::span<const Transition> batch, double gamma) {
  return LossAndGradientWithTargets(net, batch, Targets(batch, target_net, gamma),
                                    nullptr);
}

double DqnLossAndGradient(const nn::Mlp& net, const nn::Mlp& target_net,
                          std::span<const Transition> batch, double gamma,
                          std::vector<nn::Layer>& grads) {
  return LossAndGradientWithTargets(net, batch, Targets(batch, target_net, gamma),
                                    &grads);
}

double DqnUpdate(nn::Mlp& net, const nn::Mlp& target_net,
                 std::span<const Transition> batch, const DqnConfig& config) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  auto grads = net.ZeroGradients();
  double loss =
      DqnLossAndGradient(net, target_net, batch, config.discount_gamma, grads);
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kDivergence, "DQN loss is not finite");
  }
  net.ApplySgd(grads, config.learning_rate);
  return loss;
}

PolicyArtifact TrainDqn(const DaySet& days, const env::EnvConfig& env_config,
                        const DqnConfig& config, std::uint64_t seed) {
  config.Validate();
  env_config.Validate();
  RequireDays(days, env_config);
  std::mt19937_64 rng(seed);
  const int n_actions = env_config.bucket_size;

  nn::Mlp net = nn::Mlp::Random(LayerSizes(config.hidden, n_actions), rng,
                                config.hidden_bias_scale);
  net.layers().back().bias.setConstant(config.initial_q);
  nn::Mlp target = net;
  ReplayBuffer buffer(config.buffer_capacity, rng());
  env::VaccineEnv env(env_config);

  // The target network is frozen between syncs, so max_a' Q_target(s', a') is
  // memoized per next-state.
  nn::Optimizer optimizer(config.optimizer, config.learning_rate);
  std::map<Observation, double> target_max;
  auto target_value = [&](const Transition& t) {
    if (t.terminal || config.discount_gamma == 0.0) return t.reward;
    auto it = target_max.find(t.next_state);
    if (it == target_max.end()) {
      it = target_max.emplace(t.next_state, MaxOutput(target, t.next_state)).first;
    }
    return t.reward + config.discount_gamma * it->second;
  };

  PolicyArtifact artifact;
  artifact.kind = PolicyKind::kDqn;
  artifact.scaling = env_config.scaling;
  artifact.bucket_size = n_actions;
  artifact.exploration = config.epsilon;
  artifact.seed = seed;
  artifact.reward_curve.reserve(config.episodes);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_day(0, days.size() - 1);
  long long steps = 0;
  std::vector<double> targets;
  std::vector<int> actions;
  for (int episode = 0; episode < config.episodes; ++episode) {
    Observation obs = env.Reset(days[pick_day(rng)]);
    double total = 0.0;
    while (!env.done()) {
      int action = unit(rng) < config.epsilon ? UniformAction(n_actions, rng)
                                              : Argmax(net.Forward(obs));
      env::StepOutcome out = env.Step(action);
      total += out.reward;
      buffer.Add({obs, action, out.reward, out.observation, out.done});
      obs = out.observation;
      if (buffer.size() >= static_cast<std::size_t>(config.batch)) {
        auto batch = buffer.Sample(config.batch);
        targets.clear();
        for (const auto& t : batch) targets.push_back(target_value(t));
        auto grads = net.ZeroGradients();
        double loss = LossAndGradientWithTargets(net, batch, targets, &grads);
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::kDivergence, "DQN loss is not finite");
        }
        actions.clear();
        for (const auto& t : batch) actions.push_back(t.action);
        optimizer.StepSparse(net, grads, actions);
      }
      if (++steps % config.target_sync_every == 0) {
        target = net;
        target_max.clear();
      }
    }
    artifact.reward_curve.push_back(total / env_config.recipients_per_day);
  }
  if (!net.AllFinite()) {
    throw Error(ErrorCode::kDivergence, "DQN parameters are not finite");
  }
  artifact.network = std::move(net);
  return artifact;
}

std::vector<double> NStepReturns(const Rollout& rollout, double discount) {
  std::vector<double> returns(rollout.rewards.size());
  double g = rollout.bootstrap_value;
  for (std::size_t i = rollout.rewards.size(); i-- > 0;) {
    g = rollout.rewards[i] + discount * g;
    returns[i] = g;
  }
  return returns;
}

double ActorLossAndGradient(const nn::Mlp& actor, const Rollout& rollout,
                            std::span<const double> advantages,
                            double entropy_weight, double exploration,
                            std::vector<nn::Layer>* grads) {
  const auto steps = static_cast<Eigen::Index>(rollout.states.size());
  nn::ForwardCache cache;
  nn::Matrix logits = actor.ForwardBatch(StackObservations(rollout.states), &cache);
  nn::Matrix dlogits(logits.rows(), steps);
  const double n_actions = static_cast<double>(logits.rows());
  double loss = 0.0;
  const double n = static_cast<double>(steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    nn::Vector pi = Softmax(logits.col(t));
    nn::Vector log_pi =
        logits.col(t).array() - logits.col(t).maxCoeff() -
        std::log((logits.col(t).array() - logits.col(t).maxCoeff()).exp().sum());
    double h = Entropy(pi);
    int a = rollout.actions[t];
    // Behavior probability mu_a = (1 - eps) pi_a + eps / n.
    double mu = (1.0 - exploration) * pi(a) + exploration / n_actions;
    double credit = (1.0 - exploration) * pi(a) / mu;
    loss += (-advantages[t] * std::log(mu) - entropy_weight * h) / n;
    // d(-A log mu_a)/dz = -A credit (onehot - pi); d(-w H)/dz = w pi (log pi + H).
    nn::Vector g = advantages[t] * credit * pi;
    g(a) -= advantages[t] * credit;
    g += entropy_weight * pi.cwiseProduct((log_pi.array() + h).matrix());
    dlogits.col(t) = g / n;
  }
  if (grads) actor.Backward(cache, dlogits, *grads);
  return loss;
}

double CriticLossAndGradient(const nn::Mlp& critic, const Rollout& rollout,
                             std::span<const double> returns,
                             std::vector<nn::Layer>* grads) {
  const auto steps = static_cast<Eigen::Index>(rollout.states.size());
  nn::ForwardCache cache;
  nn::Matrix values = critic.ForwardBatch(StackObservations(rollout.states), &cache);
  nn::Matrix dvalues(1, steps);
  double loss = 0.0;
  const double n = static_cast<double>(steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    double err = values(0, t) - returns[t];
    loss += err * err / n;
    dvalues(0, t) = 2.0 * err / n;
  }
  if (grads) critic.Backward(cache, dvalues, *grads);
  return loss;
}

PolicyArtifact TrainActorCritic(const DaySet& days,
                                const env::EnvConfig& env_config,
                                const A2cConfig& config, std::uint64_t seed) {
  config.Validate();
  env_config.Validate();
  RequireDays(days, env_config);
  std::mt19937_64 rng(seed);
  const int n_actions = env_config.bucket_size;

  nn::Mlp actor = nn::Mlp::Random(LayerSizes(config.hidden, n_actions), rng,
                                  config.hidden_bias_scale);
  // Zero output layer: the initial policy is uniform.
  actor.layers().back().weights.setZero();
  nn::Mlp critic = nn::Mlp::Random(LayerSizes(config.hidden, 1), rng,
                                   config.hidden_bias_scale);
  env::VaccineEnv env(env_config);

  PolicyArtifact artifact;
  artifact.kind = PolicyKind::kActorCritic;
  artifact.scaling = env_config.scaling;
  artifact.bucket_size = n_actions;
  artifact.exploration = config.exploration;
  artifact.seed = seed;
  artifact.reward_curve.reserve(config.episodes);

  nn::Optimizer actor_opt(config.optimizer, config.actor_learning_rate);
  nn::Optimizer critic_opt(config.optimizer, config.critic_learning_rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_day(0, days.size() - 1);
  std::vector<double> advantages;
  for (int episode = 0; episode < config.episodes; ++episode) {
    if (config.linear_decay) {
      double remaining = 1.0 - static_cast<double>(episode) / config.episodes;
      actor_opt.set_learning_rate(config.actor_learning_rate * remaining);
      critic_opt.set_learning_rate(config.critic_learning_rate * remaining);
    }
    Observation obs = env.Reset(days[pick_day(rng)]);
    double total = 0.0;
    while (!env.done()) {
      Rollout rollout;
      bool ended = false;
      while (!ended && static_cast<int>(rollout.states.size()) < config.rollout_length) {
        nn::Vector pi = Softmax(actor.Forward(obs));
        int action = unit(rng) < config.exploration ? UniformAction(n_actions, rng)
                                                    : SampleCategorical(pi, rng);
        env::StepOutcome out = env.Step(action);
        rollout.states.push_back(obs);
        rollout.actions.push_back(action);
        rollout.rewards.push_back(out.reward);
        total += out.reward;
        obs = out.observation;
        ended = out.done;
      }
      rollout.bootstrap_value = ended ? 0.0 : critic.Forward(obs)(0);
      std::vector<double> returns = NStepReturns(rollout, config.discount);
      advantages.clear();
      for (std::size_t t = 0; t < returns.size(); ++t) {
        advantages.push_back(returns[t] - critic.Forward(rollout.states[t])(0));
      }
      auto actor_grads = actor.ZeroGradients();
      auto critic_grads = critic.ZeroGradients();
      double actor_loss = ActorLossAndGradient(actor, rollout, advantages, config.entropy_weight,
                           config.exploration, &actor_grads);
      double critic_loss =
          CriticLossAndGradient(critic, rollout, returns, &critic_grads);
      if (!std::isfinite(actor_loss) || !std::isfinite(critic_loss)) {
        throw Error(ErrorCode::kDivergence, "actor-critic loss is not finite");
      }
      actor_opt.Step(actor, actor_grads);
      critic_opt.Step(critic, critic_grads);
    }
    artifact.reward_curve.push_back(total / env_config.recipients_per_day);
  }
  if (!actor.AllFinite() || !critic.AllFinite()) {
    throw Error(ErrorCode::kDivergence, "actor-critic parameters are not finite");
  }
  artifact.network = std::move(actor);
  artifact.critic = std::move(critic);
  return artifact;
}

nlohmann::json NetworkToJson(const nn::Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> w;
    w.reserve(layer.weights.size());
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        w.push_back(layer.weights(r, c));
      }
    }
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back({{"weights", w}, {"bias", b}});
  }
  return {{"layer_sizes", net.sizes()},
          {"activation", "relu"},
          {"layers", layers}};
}

nn::Mlp NetworkFromJson(const nlohmann::json& doc) {
  try {
    nn::Mlp net(doc.at("layer_sizes").get<std::vector<int>>());
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers().size()) {
      throw Error(ErrorCode::kSchema, "layer count mismatch");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto w = layers[l].at("weights").get<std::vector<double>>();
      auto b = layers[l].at("bias").get<std::vector<double>>();
      auto& layer = net.layers()[l];
      if (w.size() != static_cast<std::size_t>(layer.weights.size()) ||
          b.size() != static_cast<std::size_t>(layer.bias.size())) {
        throw Error(ErrorCode::kSchema, "layer " + std::to_string(l) + " shape mismatch");
      }
      std::size_t i = 0;
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
          layer.weights(r, c) = w[i++];
        }
      }
      for (std::size_t k = 0; k < b.size(); ++k) layer.bias(k) = b[k];
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("network JSON: ") + e.what());
  }
}

nlohmann::json ScalingToJson(const env::FeatureScaling& scaling) {
  nlohmann::json out = nlohmann::json::array();
  auto names = env::FeatureNames();
  for (int j = 0; j < env::kNumFeatures; ++j) {
    out.push_back({{"feature", names[j]},
                   {"min", scaling.ranges[j].min},
                   {"max", scaling.ranges[j].max}});
  }
  return out;
}

env::FeatureScaling ScalingFromJson(const nlohmann::json& doc) {
  env::FeatureScaling scaling;
  if (!doc.is_array() || doc.size() != env::kNumFeatures) {
    throw Error(ErrorCode::kSchema, "scaling must list 9 features");
  }
  for (int j = 0; j < env::kNumFeatures; ++j) {
    scaling.ranges[j] = {doc[j].at("min").get<double>(), doc[j].at("max").get<double>()};
  }
  return scaling;
}

nlohmann::json ToJson(const PolicyArtifact& policy) {
  nlohmann::json doc = {{"format", "vacsim.policy"},
                        {"version", 1},
                        {"kind", ToString(policy.kind)},
                        {"bucket_size", policy.bucket_size},
                        {"exploration", policy.exploration},
                        {"seed", policy.seed},
                        {"scaling", ScalingToJson(policy.scaling)},
                        {"network", NetworkToJson(policy.network)},
                        {"reward_curve", policy.reward_curve}};
  if (policy.critic) doc["critic"] = NetworkToJson(*policy.critic);
  return doc;
}

PolicyArtifact PolicyFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "vacsim.policy" || doc.at("version") != 1) {
      throw Error(ErrorCode::kSchema, "unsupported policy document");
    }
    PolicyArtifact p;
    p.kind = ParsePolicyKind(doc.at("kind").get<std::string>());
    p.bucket_size = doc.at("bucket_size").get<int>();
    p.exploration = doc.at("exploration").get<double>();
    p.seed = doc.at("seed").get<std::uint64_t>();
    p.scaling = ScalingFromJson(doc.at("scaling"));
    p.network = NetworkFromJson(doc.at("network"));
    p.reward_curve = doc.at("reward_curve").get<std::vector<double>>();
    if (doc.contains("critic")) p.critic = NetworkFromJson(doc.at("critic"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("policy JSON: ") + e.what());
  }
}

}  // namespace vacsim::agents
