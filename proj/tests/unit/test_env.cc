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
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "vacsim/env.h"

namespace vacsim::env {
namespace {

StateContext Context(double susceptible, std::string region, Date date = Date(2020, 12, 1)) {
  StateContext c;
  c.total_predicted_cases = 1000;
  c.predicted_death_rate = 1.5;
  c.predicted_recovery_rate = 90;
  c.susceptible = susceptible;
  c.population = 1e7;
  c.icu_beds = 100;
  c.hospital_beds = 1000;
  c.ventilators = 50;
  c.age_over_50 = 2e6;
  c.region = std::move(region);
  c.date = date;
  return c;
}

std::vector<StateContext> Day(std::vector<double> susceptible) {
  std::vector<StateContext> out;
  for (std::size_t i = 0; i < susceptible.size(); ++i) {
    out.push_back(Context(susceptible[i], "R" + std::to_string(i)));
  }
  return out;
}

EnvConfig Config(std::span<const StateContext> contexts) {
  EnvConfig c;
  c.scaling = FeatureScaling::Fit(contexts);
  return c;
}

TEST(Reward, ClosedFormValues) {
  EXPECT_NEAR(Reward(0.2, 0.2, 1e-4), 1.0, 1e-9);
  EXPECT_NEAR(Reward(0.21, 0.2, 1e-4), 0.36787944117144233, 1e-9);
  EXPECT_NEAR(Reward(0.17, 0.2, 1e-4), 1.2340980408667956e-4, 1e-9);
}

TEST(Reward, StrictlyPositiveAndUnimodal) {
  EXPECT_GT(Reward(1.0, 0.0, 1e-4), 0.0);
  const double s = 0.37;
  double previous = 2.0;
  for (int a = 370; a < 1000; ++a) {
    double r = Reward(a / 1000.0, s, 1e-4);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_LE(r, previous);
    previous = r;
  }
}

TEST(OptimalAction, Examples) {
  EXPECT_EQ(OptimalAction(0.155, 1000), 155);
  EXPECT_EQ(OptimalAction(0.0, 1000), 0);
  EXPECT_EQ(OptimalAction(0.5, 2), 1);
  EXPECT_EQ(OptimalAction(1.0, 1000), 999);
}

TEST(OptimalAction, AgreesWithBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> n_dist(1, 1000);
  for (int trial = 0; trial < 1000; ++trial) {
    double s = u(rng);
    int n = n_dist(rng);
    // Scan upward keeping the nearest action; `<=` sends exact ties up.
    int best = 0;
    for (int a = 1; a < n; ++a) {
      if (std::abs(a / double(n) - s) <= std::abs(best / double(n) - s)) best = a;
    }
    EXPECT_EQ(OptimalAction(s, n), best) << "s=" << s << " n=" << n;
  }
}

TEST(SusceptibleFractions, SumToOne) {
  auto day = Day({1e6, 2.5e6, 3e5, 7e6, 1.1e4});
  auto f = SusceptibleFractions(day);
  double sum = 0;
  for (double x : f) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_NEAR(f[1], 2.5e6 / (1e6 + 2.5e6 + 3e5 + 7e6 + 1.1e4), 1e-15);
}

TEST(VaccineEnv, ResetReturnsFirstScaledObservation) {
  auto day = Day({1e6, 2e6, 3e6, 4e6, 5e6});
  VaccineEnv env(Config(day));
  auto obs = env.Reset(day);
  EXPECT_EQ(obs, env.config().scaling.Apply(day[0]));
  EXPECT_EQ(env.cursor(), 0);
}

TEST(VaccineEnv, ZeroFeaturesScaleToZero) {
  StateContext zero;
  zero.region = "Z";
  FeatureScaling scaling;
  for (auto& r : scaling.ranges) r = {0.0, 1.0};
  for (double v : scaling.Apply(zero)) EXPECT_EQ(v, 0.0);
}

TEST(VaccineEnv, ResetRejectsBadDays) {
  auto day = Day({1e6, 2e6, 3e6, 4e6, 5e6});
  VaccineEnv env(Config(day));
  auto four = day;
  four.pop_back();
  EXPECT_THROW(env.Reset(four), Error);
  auto mixed = day;
  mixed[2].date = mixed[2].date + 1;
  EXPECT_THROW(env.Reset(mixed), Error);
}

TEST(VaccineEnv, EpisodeLengthAndRewards) {
  auto day = Day({1e5, 2e5, 3e5, 1.5e5, 2.5e5});
  VaccineEnv env(Config(day));
  env.Reset(day);
  int steps = 0;
  double s_sum = 0;
  while (!env.done()) {
    int r = env.cursor();
    s_sum += env.SusceptibleFraction(r);
    auto out = env.Step(env.OptimalAction(r));
    EXPECT_NEAR(out.reward, 1.0, 1e-9);  // each S is a multiple of 1/1000
    EXPECT_EQ(out.info.recipient, r);
    ++steps;
  }
  EXPECT_EQ(steps, 5);
  EXPECT_NEAR(s_sum, 1.0, 1e-9);
  EXPECT_THROW(env.Step(0), Error);
}

TEST(VaccineEnv, StepValidatesAction) {
  auto day = Day({1e6, 2e6, 3e6, 4e6, 5e6});
  VaccineEnv env(Config(day));
  EXPECT_THROW(env.Step(0), Error);  // not reset yet
  env.Reset(day);
  EXPECT_THROW(env.Step(-1), Error);
  EXPECT_THROW(env.Step(1000), Error);
  auto out = env.Step(77);
  EXPECT_DOUBLE_EQ(out.info.allocation_fraction, 0.077);
  EXPECT_NEAR(out.reward, Reward(0.077, 1.0 / 15, 1e-4), 1e-15);
}

TEST(Scaling, ClampsOutsideFittedRange) {
  auto day = Day({1e6, 2e6, 3e6, 4e6, 5e6});
  auto scaling = FeatureScaling::Fit(day);
  auto obs = scaling.Apply(Context(9e6, "X"));
  EXPECT_EQ(obs[3], 1.0);
  obs = scaling.Apply(Context(0, "X"));
  EXPECT_EQ(obs[3], 0.0);
}

TEST(ContextsCsv, RoundTrip) {
  auto day = Day({1e6, 2.123456789e6, 3e6, 4e6, 5e6});
  auto text = FormatContextsCsv(day);
  auto path = std::filesystem::temp_directory_path() / "vacsim_contexts_rt.csv";
  {
    std::ofstream out(path);
    out << text;
  }
  EXPECT_EQ(ReadContextsCsv(path), day);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace vacsim::env
