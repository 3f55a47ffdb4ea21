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

#ifndef VACSIM_TESTS_GRADCHECK_H_
#define VACSIM_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "vacsim/agents.h"
#include "vacsim/nn.h"

// Central finite-difference checks of the analytic loss gradients, shared by
// the unit tests and the acceptance binary.
namespace vacsim::testing {

inline constexpr double kFdStep = 1e-5;
// Relative error |analytic - numeric| / max(|analytic|, |numeric|, kGradFloor).
// The floor keeps near-zero gradients from amplifying rounding noise.
inline constexpr double kGradFloor = 1e-6;
inline constexpr double kGradTolerance = 1e-4;

// Largest relative error over every parameter of `net`.
inline double MaxRelativeError(
    nn::Mlp net, const std::vector<nn::Layer>& analytic,
    const std::function<double(const nn::Mlp&)>& loss) {
  const std::vector<double> grad = nn::FlattenGradients(analytic);
  std::vector<double> theta = net.Flatten();
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + kFdStep;
    net.Unflatten(theta);
    const double up = loss(net);
    theta[i] = saved - kFdStep;
    net.Unflatten(theta);
    const double down = loss(net);
    theta[i] = saved;
    const double numeric = (up - down) / (2 * kFdStep);
    const double scale = std::max({std::abs(grad[i]), std::abs(numeric), kGradFloor});
    worst = std::max(worst, std::abs(grad[i] - numeric) / scale);
  }
  return worst;
}

// Rectifier kinks make the loss non-differentiable; configurations with any
// hidden pre-activation within this distance of zero are redrawn, since a
// finite-difference probe there straddles the kink.
inline constexpr double kKinkMargin = 1e-3;

inline bool NearKink(const nn::Mlp& net, const std::vector<env::Observation>& inputs) {
  nn::Matrix x(env::kNumFeatures, static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    for (int f = 0; f < env::kNumFeatures; ++f) x(f, b) = inputs[b][f];
  }
  nn::ForwardCache cache;
  net.ForwardBatch(x, &cache);
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) {
    if ((cache.pre[l].array().abs() < kKinkMargin).any()) return true;
  }
  return false;
}

inline std::vector<int> RandomSizes(std::mt19937_64& rng, int outputs) {
  std::uniform_int_distribution<int> depth(1, 2), width(2, 8);
  std::vector<int> sizes = {env::kNumFeatures};
  for (int d = depth(rng); d > 0; --d) sizes.push_back(width(rng));
  sizes.push_back(outputs);
  return sizes;
}

inline env::Observation RandomObservation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  env::Observation o;
  for (double& v : o) v = u(rng);
  return o;
}

// One random configuration each.
inline double DqnGradientError(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> outputs_dist(2, 10), batch_dist(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int outputs = outputs_dist(rng);
  auto sizes = RandomSizes(rng, outputs);
  nn::Mlp net = nn::Mlp::Random(sizes, rng, 0.5);
  nn::Mlp target = nn::Mlp::Random(sizes, rng, 0.5);
  std::vector<agents::Transition> batch(batch_dist(rng));
  for (auto& t : batch) {
    t.state = RandomObservation(rng);
    t.next_state = RandomObservation(rng);
    t.action = std::uniform_int_distribution<int>(0, outputs - 1)(rng);
    t.reward = u(rng);
    t.terminal = u(rng) < 0.3;
  }
  const double gamma = u(rng);
  std::vector<env::Observation> probes;
  for (const auto& t : batch) probes.push_back(t.state);
  if (NearKink(net, probes)) return DqnGradientError(rng);
  auto grads = net.ZeroGradients();
  agents::DqnLossAndGradient(net, target, batch, gamma, grads);
  return MaxRelativeError(net, grads, [&](const nn::Mlp& m) {
    return agents::DqnLoss(m, target, batch, gamma);
  });
}

inline agents::Rollout RandomRollout(std::mt19937_64& rng, int outputs) {
  agents::Rollout r;
  const int steps = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int t = 0; t < steps; ++t) {
    r.states.push_back(RandomObservation(rng));
    r.actions.push_back(std::uniform_int_distribution<int>(0, outputs - 1)(rng));
    r.rewards.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
  }
  return r;
}

inline double ActorGradientError(std::mt19937_64& rng) {
  const int outputs = std::uniform_int_distribution<int>(2, 10)(rng);
  nn::Mlp actor = nn::Mlp::Random(RandomSizes(rng, outputs), rng, 0.5);
  auto rollout = RandomRollout(rng, outputs);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> advantages;
  for (std::size_t t = 0; t < rollout.states.size(); ++t) advantages.push_back(normal(rng));
  std::uniform_real_distribution<double> u(0.0, 0.5);
  const double entropy_weight = u(rng);
  const double exploration = u(rng);
  if (NearKink(actor, rollout.states)) return ActorGradientError(rng);
  auto grads = actor.ZeroGradients();
  agents::ActorLossAndGradient(actor, rollout, advantages, entropy_weight, exploration, &grads);
  return MaxRelativeError(actor, grads, [&](const nn::Mlp& m) {
    return agents::ActorLossAndGradient(m, rollout, advantages, entropy_weight, exploration,
                                        nullptr);
  });
}

inline double CriticGradientError(std::mt19937_64& rng) {
  nn::Mlp critic = nn::Mlp::Random(RandomSizes(rng, 1), rng, 0.5);
  auto rollout = RandomRollout(rng, 1);
  auto returns = agents::NStepReturns(rollout, 0.9);
  if (NearKink(critic, rollout.states)) return CriticGradientError(rng);
  auto grads = critic.ZeroGradients();
  agents::CriticLossAndGradient(critic, rollout, returns, &grads);
  return MaxRelativeError(critic, grads, [&](const nn::Mlp& m) {
    return agents::CriticLossAndGradient(m, rollout, returns, nullptr);
  });
}

}  // namespace vacsim::testing

#endif  // VACSIM_TESTS_GRADCHECK_H_
