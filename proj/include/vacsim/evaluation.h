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

#ifndef VACSIM_EVALUATION_H_
#define VACSIM_EVALUATION_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "vacsim/distribution.h"
#include "vacsim/epi_engine.h"

// Baseline comparison: project each region forward after a one-off
// vaccination and difference the summed case curves of two allocations.
namespace vacsim::eval {

enum class CasesMode {
  kCumulative,  // infections ever, excluding vaccine-immunized persons
  kActive,      // currently infected compartment
};
std::string ToString(CasesMode mode);
CasesMode ParseCasesMode(const std::string& text);

struct RegionScenario {
  std::string region;
  epi::EpiParams params;
  epi::CompartmentState initial;
};

// Everything the two allocations share.
struct Scenario {
  std::vector<RegionScenario> regions;
  Date start;
  double doses = 0.0;
  double efficacy = 1.0;
  int horizon_days = 45;
  double dt = epi::kDefaultDt;
  CasesMode mode = CasesMode::kCumulative;
};

struct ComparisonReport {
  int bucket_size = 0;
  double doses = 0.0;
  double efficacy = 1.0;
  CasesMode mode = CasesMode::kCumulative;
  // Day 1..horizon, summed over regions.
  std::vector<double> cases_baseline;
  std::vector<double> cases_candidate;
  // baseline - candidate per day.
  std::vector<double> difference;
  // Difference on the horizon day.
  double cumulative_difference = 0.0;
};

// percent_i = 100 * infected_i / sum(infected) over (region, I) pairs.
DistributionSet NaivePolicy(std::span<const std::pair<std::string, double>> infected,
                            Date date, int bucket_size = 0);
DistributionSet NaivePolicy(const Scenario& scenario, int bucket_size = 0);

// Vaccinates each region with percent_i * doses / 100 and integrates it
// for the horizon. Trajectories follow the scenario's region order.
std::vector<epi::Trajectory> ProjectWithAllocation(const DistributionSet& dist,
                                                   const Scenario& scenario);

// Cases of one region's trajectory for days 1..horizon. `immunized` is the
// number moved from S to R by the vaccine.
std::vector<double> CaseSeries(const epi::Trajectory& trajectory, double immunized,
                               CasesMode mode);

ComparisonReport Compare(const DistributionSet& candidate,
                         const DistributionSet& baseline, const Scenario& scenario);

// CSV `day,cases_naive,cases_candidate,difference`.
std::string FormatComparisonCsv(const ComparisonReport& report);
nlohmann::json ToJson(const ComparisonReport& report);

}  // namespace vacsim::eval

#endif  // VACSIM_EVALUATION_H_
