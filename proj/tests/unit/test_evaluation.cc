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

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "vacsim/evaluation.h"

namespace vacsim::eval {
namespace {

using Weights = std::vector<std::pair<std::string, double>>;

RegionScenario Region(std::string name, double n, double infected, double recovered,
                      double beta) {
  RegionScenario r;
  r.region = std::move(name);
  r.params = {beta, 0.2, 0.1, 0.005, n};
  r.initial = {n - 2 * infected - recovered, infected, infected, recovered, 0};
  return r;
}

// Two regions where the infected shares and susceptible shares disagree:
// A carries most infections but has little susceptible headroom left.
Scenario Divergent(double doses) {
  Scenario s;
  s.start = Date(2020, 12, 31);
  s.doses = doses;
  s.regions = {Region("A", 1e7, 80000, 6e6, 0.25), Region("B", 1e7, 5000, 1e5, 0.25)};
  return s;
}

DistributionSet Split(const Scenario& s, std::vector<double> weights) {
  Weights w;
  for (std::size_t i = 0; i < weights.size(); ++i) w.push_back({s.regions[i].region, weights[i]});
  return Proportional(w, s.start, 0);
}

TEST(NaivePolicy, Proportionality) {
  auto d = NaivePolicy(Weights{{"a", 100}, {"b", 300}, {"c", 600}}, Date(2020, 12, 31));
  EXPECT_NEAR(d.PercentOf("a"), 10, 1e-12);
  EXPECT_NEAR(d.PercentOf("b"), 30, 1e-12);
  EXPECT_NEAR(d.PercentOf("c"), 60, 1e-12);

  Weights equal;
  for (int i = 0; i < 5; ++i) equal.push_back({"r" + std::to_string(i), 7.0});
  for (double p : NaivePolicy(equal, Date(2020, 12, 31)).Percents()) EXPECT_NEAR(p, 20, 1e-12);

  auto one = NaivePolicy(Weights{{"a", 0}, {"b", 5}, {"c", 0}}, Date(2020, 12, 31));
  EXPECT_EQ(one.Percents(), (std::vector<double>{0, 100, 0}));

  EXPECT_THROW(NaivePolicy(Weights{{"a", 0}, {"b", 0}}, Date(2020, 12, 31)), Error);
}

TEST(ProjectWithAllocation, ZeroDosesIsUnvaccinated) {
  auto s = Divergent(0);
  auto trajectories = ProjectWithAllocation(Split(s, {1, 1}), s);
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    auto plain = epi::Integrate(s.regions[i].initial, s.regions[i].params, s.horizon_days);
    EXPECT_EQ(trajectories[i].states, plain.states);
  }
}

TEST(ProjectWithAllocation, SaturatingDosesStopInfection) {
  auto s = Divergent(5e7);
  auto trajectories = ProjectWithAllocation(Split(s, {0, 1}), s);
  for (const auto& st : trajectories[1].states) EXPECT_EQ(st.susceptible, 0.0);
  for (const auto& t : trajectories) {
    for (const auto& st : t.states) EXPECT_NEAR(st.Total(), 1e7, 1e-6 * 1e7);
  }
}

TEST(ProjectWithAllocation, SymmetricRegionsStaySymmetric) {
  Scenario s;
  s.start = Date(2020, 12, 31);
  s.doses = 1e6;
  s.regions = {Region("A", 5e6, 1000, 1e5, 0.3), Region("B", 5e6, 1000, 1e5, 0.3)};
  auto t = ProjectWithAllocation(Split(s, {1, 1}), s);
  EXPECT_EQ(t[0].states, t[1].states);
}

TEST(Compare, IdentityAndZeroDoses) {
  auto s = Divergent(2e6);
  auto naive = NaivePolicy(s);
  auto same = Compare(naive, naive, s);
  ASSERT_EQ(same.difference.size(), 45u);
  ASSERT_EQ(same.cases_baseline.size(), 45u);
  for (double d : same.difference) EXPECT_EQ(d, 0.0);

  auto none = Divergent(0);
  auto r = Compare(Split(none, {0, 1}), Split(none, {1, 0}), none);
  for (double d : r.difference) EXPECT_EQ(d, 0.0);
}

TEST(Compare, AntiSymmetric) {
  auto s = Divergent(2e6);
  auto a = Split(s, {0.3, 0.7});
  auto b = Split(s, {0.8, 0.2});
  auto ab = Compare(a, b, s);
  auto ba = Compare(b, a, s);
  for (std::size_t d = 0; d < ab.difference.size(); ++d) {
    EXPECT_NEAR(ab.difference[d], -ba.difference[d], 1e-9 * std::max(1.0, std::abs(ab.difference[d])));
  }
}

TEST(Compare, SusceptibleProportionalBeatsNaive) {
  for (CasesMode mode : {CasesMode::kCumulative, CasesMode::kActive}) {
    auto s = Divergent(2e6);
    s.mode = mode;
    Weights susceptible;
    for (const auto& r : s.regions) susceptible.push_back({r.region, r.initial.susceptible});
    auto candidate = Proportional(susceptible, s.start, 0);
    auto report = Compare(candidate, NaivePolicy(s), s);
    EXPECT_GT(report.cumulative_difference, 0.0) << ToString(mode);
    EXPECT_EQ(report.cumulative_difference, report.difference.back());
  }
}

TEST(Compare, RejectsMismatchedRegions) {
  auto s = Divergent(2e6);
  auto other = Proportional(Weights{{"A", 1}, {"C", 1}}, s.start, 0);
  EXPECT_THROW(Compare(other, NaivePolicy(s), s), Error);
}

TEST(CasesMode, ParseRoundTrip) {
  for (CasesMode m : {CasesMode::kCumulative, CasesMode::kActive}) {
    EXPECT_EQ(ParseCasesMode(ToString(m)), m);
  }
  EXPECT_THROW(ParseCasesMode("weekly"), Error);
}

TEST(ComparisonCsv, Shape) {
  auto s = Divergent(2e6);
  auto report = Compare(Split(s, {1, 3}), NaivePolicy(s), s);
  auto csv = FormatComparisonCsv(report);
  EXPECT_EQ(csv.rfind("day,cases_naive,cases_candidate,difference\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 46);
}

}  // namespace
}  // namespace vacsim::eval
