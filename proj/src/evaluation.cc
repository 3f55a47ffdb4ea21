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

#include "vacsim/evaluation.h"

#include "vacsim/csv.h"

namespace vacsim::eval {

std::string ToString(CasesMode mode) {
  return mode == CasesMode::kCumulative ? "cumulative" : "active";
}

CasesMode ParseCasesMode(const std::string& text) {
  if (text == "cumulative") return CasesMode::kCumulative;
  if (text == "active") return CasesMode::kActive;
  throw Error(ErrorCode::kInvalidArgument, "unknown cases mode '" + text + "'");
}

DistributionSet NaivePolicy(std::span<const std::pair<std::string, double>> infected,
                            Date date, int bucket_size) {
  double total = 0.0;
  for (const auto& [region, i] : infected) total += i;
  if (!(total > 0)) {
    throw Error(ErrorCode::kDegenerate, "no infected persons to allocate by");
  }
  return Proportional(infected, date, bucket_size);
}

DistributionSet NaivePolicy(const Scenario& scenario, int bucket_size) {
  std::vector<std::pair<std::string, double>> infected;
  for (const auto& r : scenario.regions) infected.emplace_back(r.region, r.initial.infected);
  return NaivePolicy(infected, scenario.start, bucket_size);
}

std::vector<epi::Trajectory> ProjectWithAllocation(const DistributionSet& dist,
                                                   const Scenario& scenario) {
  if (dist.shares.size() != scenario.regions.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "distribution and scenario cover different regions");
  }
  if (!(scenario.doses >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "doses must be >= 0");
  }
  std::vector<epi::Trajectory> out;
  out.reserve(scenario.regions.size());
  for (const auto& r : scenario.regions) {
    double doses = dist.PercentOf(r.region) * scenario.doses / 100.0;
    auto start = epi::ApplyVaccine(r.initial, doses, scenario.efficacy);
    out.push_back(epi::Integrate(start, r.params, scenario.horizon_days, scenario.dt,
                                 scenario.start));
  }
  return out;
}

std::vector<double> CaseSeries(const epi::Trajectory& trajectory, double immunized,
                               CasesMode mode) {
  std::vector<double> out;
  out.reserve(trajectory.states.size() - 1);
  for (std::size_t d = 1; d < trajectory.states.size(); ++d) {
    const auto& s = trajectory.states[d];
    out.push_back(mode == CasesMode::kActive ? s.infected : s.EverInfected() - immunized);
  }
  return out;
}

namespace {

std::vector<double> TotalCases(const DistributionSet& dist, const Scenario& scenario) {
  auto trajectories = ProjectWithAllocation(dist, scenario);
  std::vector<double> total(scenario.horizon_days, 0.0);
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& r = scenario.regions[i];
    double immunized = r.initial.susceptible -
                       epi::ApplyVaccine(r.initial,
                                         dist.PercentOf(r.region) * scenario.doses / 100.0,
                                         scenario.efficacy)
                           .susceptible;
    auto cases = CaseSeries(trajectories[i], immunized, scenario.mode);
    if (cases.size() != total.size()) {
      throw Error(ErrorCode::kInvalidArgument, "horizon mismatch");
    }
    for (std::size_t d = 0; d < total.size(); ++d) total[d] += cases[d];
  }
  return total;
}

}  // namespace

ComparisonReport Compare(const DistributionSet& candidate,
                         const DistributionSet& baseline, const Scenario& scenario) {
  if (scenario.horizon_days < 1) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1 day");
  }
  ComparisonReport report;
  report.bucket_size = candidate.bucket_size;
  report.doses = scenario.doses;
  report.efficacy = scenario.efficacy;
  report.mode = scenario.mode;
  report.cases_baseline = TotalCases(baseline, scenario);
  report.cases_candidate = TotalCases(candidate, scenario);
  report.difference.resize(scenario.horizon_days);
  for (int d = 0; d < scenario.horizon_days; ++d) {
    report.difference[d] = report.cases_baseline[d] - report.cases_candidate[d];
  }
  report.cumulative_difference = report.difference.back();
  return report;
}

std::string FormatComparisonCsv(const ComparisonReport& report) {
  std::string out = csv::JoinRow({"day", "cases_naive", "cases_candidate", "difference"});
  for (std::size_t d = 0; d < report.difference.size(); ++d) {
    out += csv::JoinRow({std::to_string(d + 1), csv::FormatDouble(report.cases_baseline[d]),
                         csv::FormatDouble(report.cases_candidate[d]),
                         csv::FormatDouble(report.difference[d])});
  }
  return out;
}

nlohmann::json ToJson(const ComparisonReport& report) {
  return {{"bucket_size", report.bucket_size},
          {"doses", report.doses},
          {"efficacy", report.efficacy},
          {"cases_mode", ToString(report.mode)},
          {"cases_naive", report.cases_baseline},
          {"cases_candidate", report.cases_candidate},
          {"difference", report.difference},
          {"cumulative_difference", report.cumulative_difference}};
}

}  // namespace vacsim::eval
