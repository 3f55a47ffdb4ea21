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

#ifndef VACSIM_PIPELINE_H_
#define VACSIM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "vacsim/agents.h"
#include "vacsim/bandit.h"
#include "vacsim/data_io.h"
#include "vacsim/distribution.h"
#include "vacsim/evaluation.h"

// Feed-forward orchestration: fit -> contexts -> RL agent -> logged
// experience -> contextual bandit -> per-bucket distribution sets.
namespace vacsim::pipeline {

struct Seeds {
  std::uint64_t fit = 1;
  std::uint64_t agent = 1;
  std::uint64_t log = 1;
  std::uint64_t bandit = 1;
  bool operator==(const Seeds&) const = default;
};

struct RunConfig {
  std::filesystem::path series_path;
  std::filesystem::path statics_path;
  // Empty means every region of the snapshot, in statics order.
  std::vector<std::string> regions = {"Assam", "Delhi", "Jharkhand", "Maharashtra",
                                      "Nagaland"};
  Date train_start{2020, 12, 1};
  Date train_end{2020, 12, 26};
  Date test_start{2020, 12, 26};
  Date test_end{2020, 12, 31};
  Date distribution_date{2020, 12, 31};
  std::vector<int> buckets = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  agents::PolicyKind agent = agents::PolicyKind::kDqn;
  Seeds seeds;
  // Replays of the training window when logging behavior for the bandit.
  int log_passes = 20;
  env::EnvConfig env;
  agents::DqnConfig dqn;
  agents::A2cConfig actor_critic;
  bandit::BanditConfig bandit;
  epi::FitOptions fit;
  double doses = 1'000'000;
  double efficacy = 1.0;
  int horizon_days = 45;
  eval::CasesMode cases_mode = eval::CasesMode::kCumulative;
  std::filesystem::path output_dir = "runs";

  void Validate() const;
};

// Canonical JSON; file paths are relative to `base_dir` when loading.
nlohmann::json ToJson(const RunConfig& config);
RunConfig RunConfigFromJson(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir = {});
RunConfig LoadRunConfig(const std::filesystem::path& path);

struct SimulationRow {
  std::string region;
  Date date;
  int bucket_size = 0;
  double death = 0.0;
  double recovery = 0.0;
  double infected = 0.0;
  double susceptible = 0.0;
  double vaccine_percent = 0.0;
};

struct RunArtifact {
  std::string run_id;
  RunConfig config;
  std::string config_hash;
  std::string snapshot_hash;
  data::FitMap fits;
  agents::PolicyArtifact policy;
  std::vector<bandit::BanditExample> log;
  bandit::BanditModel bandit;
  std::vector<std::vector<env::StateContext>> test_contexts;
  // Per bucket, one set per test day.
  std::map<int, std::vector<DistributionSet>> distributions;
  // Same, read straight from the RL policy's greedy actions.
  std::map<int, std::vector<DistributionSet>> policy_distributions;
  DistributionSet naive;
  std::map<int, eval::ComparisonReport> comparisons;
  std::vector<SimulationRow> simulation;

  const DistributionSet& Distribution(int bucket, Date date) const;
};

// round(action * to / from) clamped to [0, to - 1].
int ScaleBucket(int action, int from_bucket, int to_bucket);

// percent_i = 100 * a_i / sum(a).
DistributionSet Normalize(std::span<const std::pair<std::string, int>> actions,
                          Date date, int bucket_size);

// Replays the policy's behavior (exploring) actions over consecutive days,
// `passes` times from one random stream; rounds number the whole log.
std::vector<bandit::BanditExample> GenerateLog(
    const agents::PolicyArtifact& policy,
    const std::vector<std::vector<env::StateContext>>& days,
    const env::EnvConfig& env_config, std::uint64_t seed, int passes = 1);

agents::PolicyArtifact TrainAgent(const RunConfig& config,
                                  const agents::DaySet& days,
                                  const env::EnvConfig& env_config);

// Bandit allocation for one day at one bucket size.
DistributionSet Allocate(const bandit::BanditModel& model,
                         const env::FeatureScaling& scaling,
                         std::span<const env::StateContext> day, int bucket);

// Greedy RL allocation for one day at one bucket size.
DistributionSet AllocateFromPolicy(const agents::PolicyArtifact& policy,
                                   std::span<const env::StateContext> day, int bucket);

// Evaluation scenario on `date` for the given regions.
eval::Scenario BuildScenario(const data::Snapshot& snapshot, const data::FitMap& fits,
                             const RunConfig& config, Date date);

// Restricts the snapshot to `regions` in that order (all when empty).
data::Snapshot SelectRegions(const data::Snapshot& snapshot,
                             const std::vector<std::string>& regions);

RunArtifact RunVacsim(const RunConfig& config, const data::Snapshot& snapshot);
RunArtifact RunVacsim(const RunConfig& config);

// File name -> contents of everything a run persists.
std::map<std::string, std::string> RenderRunFiles(const RunArtifact& run);
// Writes into output_dir/run_id and returns that directory.
std::filesystem::path WriteRun(const RunArtifact& run);

}  // namespace vacsim::pipeline

#endif  // VACSIM_PIPELINE_H_
