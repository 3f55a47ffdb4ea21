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

#ifndef VACSIM_BANDIT_H_
#define VACSIM_BANDIT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "vacsim/common.h"
#include "vacsim/env.h"

// Contextual bandit over a discrete allocation axis. The reward model is a
// linear regression on (context + bucket feature) crossed with a cubic
// Legendre basis of the normalized action, fitted by inverse-propensity
// weighted ridge least squares on accumulated sufficient statistics.
namespace vacsim::bandit {

// Bucket size that maps to a bucket feature of 1.
inline constexpr double kReferenceBucket = 1000.0;
inline constexpr int kPolyDegree = 3;
// Intercept, 9 scaled features, bucket feature.
inline constexpr int kContextDims = env::kNumFeatures + 2;
inline constexpr int kBasisDims = kContextDims * (kPolyDegree + 1);

struct BanditExample {
  long long round = 0;
  Date date;
  std::string region;
  int bucket_size = 1000;
  int action = 0;
  double reward = 1.0;
  double probability = 1.0;
  env::Observation context{};  // scaled features

  void Validate() const;
  bool operator==(const BanditExample&) const = default;
};

enum class Link {
  kLog,       // regress ln(reward)
  kIdentity,  // regress reward
};

struct BanditConfig {
  double epsilon = 0.1;
  double ridge = 1e-6;
  Link link = Link::kLog;
  // One model per bucket size instead of a shared model.
  bool per_bucket = false;
  // Log-link examples with ln(reward) below this are censored: they sit on
  // the reward floor and carry no shape information.
  double min_log_reward = -700.0;

  void Validate() const;
  bool operator==(const BanditConfig&) const = default;
};

// Sufficient statistics and solution of one weighted least-squares problem.
struct Component {
  Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(kBasisDims, kBasisDims);
  Eigen::VectorXd xtwy = Eigen::VectorXd::Zero(kBasisDims);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(kBasisDims);
  long long count = 0;

  bool operator==(const Component&) const = default;
};

struct BanditModel {
  BanditConfig config;
  // Largest bucket size seen in training; the default prediction range.
  int n_actions = 0;
  // Keyed by bucket size in per-bucket mode, by 0 otherwise.
  std::map<int, Component> components;
  // 1 after Train, incremented by every Update.
  int version = 0;

  bool operator==(const BanditModel&) const = default;
};

struct Prediction {
  int action = 0;
  // Predicted reward of every action.
  std::vector<double> scores;
};

struct Choice {
  int action = 0;
  double probability = 1.0;
};

struct RegretRecord {
  std::vector<double> per_round;
  std::vector<double> cumulative;

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

// Feature vector phi(x, bucket, u) with u = action / bucket_size.
Eigen::VectorXd Basis(const env::Observation& context, int bucket_size,
                      double u);

// Orders examples by round (stable), then accumulates them. `seed` is kept
// for interface symmetry; the solver itself is deterministic.
BanditModel Train(std::span<const BanditExample> examples,
                  const BanditConfig& config, std::uint64_t seed);

// Adds examples to the statistics, re-solves and bumps the version.
void Update(BanditModel& model, std::span<const BanditExample> examples);

// Scans actions [0, bucket_size). bucket_size 0 means model.n_actions.
Prediction Predict(const BanditModel& model, const env::Observation& context,
                   int bucket_size = 0);

// Fitted value of one action before the inverse link; under the log link
// this is the predicted log reward, which stays finite where exp underflows.
double LinkScore(const BanditModel& model, const env::Observation& context, int action,
                 int bucket_size = 0);

// Epsilon-greedy draw with its exact sampling probability.
Choice Act(const BanditModel& model, const env::Observation& context,
           double epsilon, std::mt19937_64& rng, int bucket_size = 0);

// Z = max(0, p_star - expected); Z* accumulates.
void RegretUpdate(RegretRecord& record, double p_star, double expected);

// CSV `round,date,region,bucket_size,action,reward,probability,f1..f9`.
std::vector<BanditExample> ReadLogCsv(const std::filesystem::path& path);
std::vector<BanditExample> ParseLogCsv(std::string_view text,
                                       std::string source);
void WriteLogCsv(const std::filesystem::path& path,
                 std::span<const BanditExample> examples);
std::string FormatLogCsv(std::span<const BanditExample> examples);

nlohmann::json ToJson(const BanditModel& model);
BanditModel BanditFromJson(const nlohmann::json& doc);
nlohmann::json ExampleToJson(const BanditExample& example);
BanditExample ExampleFromJson(const nlohmann::json& doc);

}  // namespace vacsim::bandit

#endif  // VACSIM_BANDIT_H_
