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

#ifndef VACSIM_ENV_H_
#define VACSIM_ENV_H_

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vacsim/common.h"

namespace vacsim::env {

inline constexpr int kNumFeatures = 9;
using Observation = std::array<double, kNumFeatures>;

// One recipient region on one day.
struct StateContext {
  double total_predicted_cases = 0.0;
  double predicted_death_rate = 0.0;      // percent
  double predicted_recovery_rate = 0.0;   // percent
  double susceptible = 0.0;
  double population = 0.0;
  double icu_beds = 0.0;
  double hospital_beds = 0.0;
  double ventilators = 0.0;
  double age_over_50 = 0.0;
  std::string region;
  Date date;

  // Raw feature vector in the order listed above.
  Observation Features() const;
  void Validate() const;
  bool operator==(const StateContext&) const = default;
};

std::array<const char*, kNumFeatures> FeatureNames();

struct FeatureRange {
  double min = 0.0;
  double max = 1.0;
  bool operator==(const FeatureRange&) const = default;
};

// Per-feature min-max scaling; values outside the fitted range are clamped.
struct FeatureScaling {
  std::array<FeatureRange, kNumFeatures> ranges{};

  static FeatureScaling Fit(std::span<const StateContext> contexts);
  Observation Apply(const StateContext& context) const;
  Observation Apply(const Observation& raw) const;
  bool operator==(const FeatureScaling&) const = default;
};

struct EnvConfig {
  int bucket_size = 1000;
  double batch_size = 1'000'000;
  int recipients_per_day = 5;
  double efficacy = 1.0;
  double reward_width = 1e-4;
  FeatureScaling scaling;

  void Validate() const;
};

struct StepInfo {
  int recipient = 0;
  double allocation_fraction = 0.0;   // A_i = action / bucket_size
  double susceptible_fraction = 0.0;  // S_i
};

struct StepOutcome {
  Observation observation{};
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// exp(-(A - S)^2 / width), floored at the smallest normal double so it stays
// strictly positive.
double Reward(double allocation_fraction, double susceptible_fraction,
              double width);

// Action in [0, bucket_size - 1] closest to S * bucket_size; exact ties go to
// the larger action.
int OptimalAction(double susceptible_fraction, int bucket_size);

// S_i for every recipient: susceptible / sum of the day's susceptible.
std::vector<double> SusceptibleFractions(std::span<const StateContext> day);

// One episode is one calendar day; the agent allocates to each recipient in
// turn. Not thread-safe; use one instance per thread.
class VaccineEnv {
 public:
  explicit VaccineEnv(EnvConfig config);

  Observation Reset(std::vector<StateContext> day_contexts);
  StepOutcome Step(int action);

  int OptimalAction(int recipient) const;
  double SusceptibleFraction(int recipient) const;
  const Observation& ObservationOf(int recipient) const;

  const EnvConfig& config() const { return config_; }
  int cursor() const { return cursor_; }
  bool done() const { return cursor_ >= static_cast<int>(contexts_.size()); }
  bool active() const { return !contexts_.empty() && !done(); }
  const std::vector<StateContext>& contexts() const { return contexts_; }

 private:
  void RequireInitialized() const;

  EnvConfig config_;
  std::vector<StateContext> contexts_;
  std::vector<Observation> observations_;
  std::vector<double> susceptible_fractions_;
  int cursor_ = 0;
};

// CSV `date,region,total_predicted_cases,death_rate,recovery_rate,susceptible,
// population,icu_beds,hospital_beds,ventilators,age_over_50`.
std::vector<StateContext> ReadContextsCsv(const std::filesystem::path& path);
std::string FormatContextsCsv(std::span<const StateContext> contexts);
void WriteContextsCsv(const std::filesystem::path& path,
                      std::span<const StateContext> contexts);

// Groups contexts by date, preserving input order within a day.
std::map<Date, std::vector<StateContext>> GroupByDate(
    std::span<const StateContext> contexts);

}  // namespace vacsim::env

#endif  // VACSIM_ENV_H_
