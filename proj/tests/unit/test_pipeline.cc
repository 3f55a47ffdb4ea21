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

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "vacsim/data_io.h"
#include "vacsim/distribution.h"
#include "vacsim/pipeline.h"

namespace vacsim::pipeline {
namespace {

const std::filesystem::path kFixtures = VACSIM_FIXTURE_DIR;

using Actions = std::vector<std::pair<std::string, int>>;

TEST(ScaleBucket, Examples) {
  EXPECT_EQ(ScaleBucket(500, 1000, 200), 100);
  EXPECT_EQ(ScaleBucket(0, 1000, 300), 0);
  EXPECT_EQ(ScaleBucket(0, 37, 5), 0);
  EXPECT_EQ(ScaleBucket(999, 1000, 100), 99);
}

TEST(ScaleBucket, MonotoneInAction) {
  for (int to : {100, 200, 700}) {
    int previous = 0;
    for (int a = 0; a < 1000; ++a) {
      int s = ScaleBucket(a, 1000, to);
      EXPECT_GE(s, previous);
      EXPECT_LT(s, to);
      previous = s;
    }
  }
}

TEST(Normalize, TableRow) {
  Actions a = {{"Assam", 31}, {"Delhi", 16}, {"Jharkhand", 35}, {"Maharashtra", 116},
               {"Nagaland", 2}};
  auto d = Normalize(a, Date(2020, 12, 31), 200);
  const std::vector<double> expected = {15.5, 8.0, 17.5, 58.0, 1.0};
  auto got = d.Percents();
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-9);
  d.Validate();
}

TEST(Normalize, SymmetryAndErrors) {
  Actions equal = {{"a", 4}, {"b", 4}, {"c", 4}, {"d", 4}, {"e", 4}};
  for (double p : Normalize(equal, Date(2020, 12, 31), 10).Percents()) EXPECT_NEAR(p, 20, 1e-12);
  Actions single = {{"a", 0}, {"b", 9}, {"c", 0}};
  EXPECT_EQ(Normalize(single, Date(2020, 12, 31), 10).Percents(),
            (std::vector<double>{0, 100, 0}));
  Actions zero = {{"a", 0}, {"b", 0}};
  try {
    Normalize(zero, Date(2020, 12, 31), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(Distribution, SumsToHundred) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 999);
  for (int trial = 0; trial < 200; ++trial) {
    Actions a;
    for (int i = 0; i < 5; ++i) a.push_back({"r" + std::to_string(i), u(rng) + (i == 0)});
    auto d = Normalize(a, Date(2020, 12, 31), 1000);
    double sum = 0;
    for (double p : d.Percents()) {
      EXPECT_GE(p, 0);
      sum += p;
    }
    EXPECT_NEAR(sum, 100, 1e-6);
  }
}

TEST(Distribution, CsvAndJsonRoundTrip) {
  Actions a = {{"a", 3}, {"b", 7}};
  auto d = Normalize(a, Date(2020, 12, 30), 10);
  std::vector<DistributionSet> sets = {d};
  EXPECT_EQ(ParseDistributionCsv(FormatDistributionCsv(sets), "mem", 10), sets);
  EXPECT_EQ(DistributionFromJson(ToJson(d)), d);
  DistributionSet bad = d;
  bad.shares[0].percent = 50;
  EXPECT_THROW(bad.Validate(), Error);
}

std::vector<std::vector<env::StateContext>> Days(int n) {
  std::vector<std::vector<env::StateContext>> days;
  for (int d = 0; d < n; ++d) {
    std::vector<env::StateContext> day;
    for (int r = 0; r < 5; ++r) {
      env::StateContext c;
      c.total_predicted_cases = 1000 + 10 * d + r;
      c.predicted_death_rate = 1.0 + 0.1 * r;
      c.predicted_recovery_rate = 90;
      c.susceptible = 1e6 * (r + 1) - 100 * d;
      c.population = 1e7;
      c.icu_beds = 10;
      c.hospital_beds = 100;
      c.ventilators = 5;
      c.age_over_50 = 1e6;
      c.region = "R" + std::to_string(r);
      c.date = Date(2020, 12, 1) + d;
      day.push_back(c);
    }
    days.push_back(day);
  }
  return days;
}

agents::PolicyArtifact RandomPolicy(const env::EnvConfig& env_config) {
  std::mt19937_64 rng(4);
  agents::PolicyArtifact p;
  p.network = nn::Mlp::Random({9, 16, env_config.bucket_size}, rng, 1.0);
  p.scaling = env_config.scaling;
  p.bucket_size = env_config.bucket_size;
  p.exploration = 0.1;
  return p;
}

env::EnvConfig EnvFor(const std::vector<std::vector<env::StateContext>>& days) {
  env::EnvConfig e;
  std::vector<env::StateContext> all;
  for (const auto& d : days) all.insert(all.end(), d.begin(), d.end());
  e.scaling = env::FeatureScaling::Fit(all);
  return e;
}

TEST(GenerateLog, CountsAndRanges) {
  auto days = Days(26);
  auto env_config = EnvFor(days);
  auto policy = RandomPolicy(env_config);
  auto log = GenerateLog(policy, days, env_config, 3);
  ASSERT_EQ(log.size(), 130u);
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(log[i].round, static_cast<long long>(i));
    EXPECT_GT(log[i].reward, 0.0);
    EXPECT_LE(log[i].reward, 1.0);
    EXPECT_GT(log[i].probability, 0.0);
    EXPECT_NEAR(log[i].probability,
                agents::BehaviorProbability(policy, log[i].context, log[i].action), 1e-12);
  }
  EXPECT_EQ(GenerateLog(policy, days, env_config, 3), log);
  EXPECT_NE(GenerateLog(policy, days, env_config, 4), log);
  EXPECT_EQ(GenerateLog(policy, days, env_config, 3, 4).size(), 520u);
}

TEST(GenerateLog, RejectsGappedDays) {
  auto days = Days(5);
  days.erase(days.begin() + 2);
  auto env_config = EnvFor(days);
  EXPECT_THROW(GenerateLog(RandomPolicy(env_config), days, env_config, 3), Error);
}

TEST(RunConfig, JsonRoundTripAndValidation) {
  RunConfig c;
  c.series_path = "/tmp/s.csv";
  c.statics_path = "/tmp/t.csv";
  c.agent = agents::PolicyKind::kActorCritic;
  c.seeds.bandit = 99;
  c.log_passes = 3;
  c.buckets = {200, 300};
  auto back = RunConfigFromJson(ToJson(c));
  EXPECT_EQ(ToJson(back), ToJson(c));

  RunConfig bad = c;
  bad.buckets.clear();
  EXPECT_THROW(bad.Validate(), Error);
  bad = c;
  bad.train_end = Date(2020, 11, 1);
  EXPECT_THROW(bad.Validate(), Error);
  auto doc = ToJson(c);
  doc["no_such_key"] = 1;
  EXPECT_THROW(RunConfigFromJson(doc), Error);
}

TEST(RunConfig, LoadsFixtureRelativeToFile) {
  auto c = LoadRunConfig(kFixtures / "five_states" / "config.json");
  EXPECT_EQ(c.series_path, kFixtures / "five_states" / "series.csv");
  EXPECT_EQ(c.regions.size(), 5u);
}

TEST(DataIo, SnapshotHashAndLookup) {
  auto a = data::LoadSnapshot(kFixtures / "symmetric" / "series.csv",
                              kFixtures / "symmetric" / "statics.csv");
  auto b = data::SnapshotFromText(data::ReadFileBytes(kFixtures / "symmetric" / "series.csv"),
                                  data::ReadFileBytes(kFixtures / "symmetric" / "statics.csv"));
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.hash.size(), 64u);
  EXPECT_EQ(a.Regions(), (std::vector<std::string>{"R1", "R2", "R3", "R4", "R5"}));
  EXPECT_THROW(a.Series("Nowhere"), Error);
  EXPECT_EQ(data::Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(DataIo, SchemaErrorsNameTheCell) {
  const std::string statics =
      "region,population,hospital_beds,icu_beds,ventilators,age_over_50\nA,1000,1,1,1,1\n";
  try {
    data::SnapshotFromText("date,region,confirmed,recovered,deaths\n2020-12-01,A,ten,0,0\n",
                           statics);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(e.location().find("confirmed"), std::string::npos) << e.location();
  }
  EXPECT_THROW(data::SnapshotFromText("date,region\n", statics), Error);
  try {
    data::SnapshotFromText("date,region,confirmed,recovered,deaths\n2020-12-01,B,10,0,0\n",
                           statics);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoverage);
  }
}

TEST(DataIo, DecreasingCumulativeNamesTheRow) {
  const std::string csv =
      "date,region,confirmed,recovered,deaths\n"
      "2020-12-01,A,100,10,1\n"
      "2020-12-02,A,90,12,1\n";
  try {
    data::ParseSeriesCsv(csv, "series.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(e.location().find("series.csv:3"), std::string::npos) << e.location();
    EXPECT_NE(e.location().find("confirmed"), std::string::npos) << e.location();
  }
}

TEST(DataIo, ContextsOverSymmetricFixture) {
  auto snap = data::LoadSnapshot(kFixtures / "symmetric" / "series.csv",
                                 kFixtures / "symmetric" / "statics.csv");
  auto fits = data::FitSnapshot(snap, epi::FitOptions{}, 1);
  auto days = data::BuildContexts(snap, fits, Date(2020, 12, 1), Date(2020, 12, 26));
  ASSERT_EQ(days.size(), 26u);
  for (std::size_t d = 0; d < days.size(); ++d) {
    ASSERT_EQ(days[d].size(), 5u);
    for (const auto& c : days[d]) {
      EXPECT_EQ(c.date, Date(2020, 12, 1) + static_cast<int>(d));
      EXPECT_NEAR(c.susceptible, c.population - c.total_predicted_cases, 1e-6 * c.population);
    }
  }
}

TEST(DataIo, SeriesCsvRoundTrip) {
  auto snap = data::LoadSnapshot(kFixtures / "five_states" / "series.csv",
                                 kFixtures / "five_states" / "statics.csv");
  auto text = data::FormatSeriesCsv(snap.series);
  EXPECT_EQ(data::FormatSeriesCsv(data::ParseSeriesCsv(text, "mem")), text);
  EXPECT_EQ(data::ParseStaticsCsv(data::FormatStaticsCsv(snap.statics), "mem"), snap.statics);
}

TEST(SelectRegions, OrderAndErrors) {
  auto snap = data::LoadSnapshot(kFixtures / "five_states" / "series.csv",
                                 kFixtures / "five_states" / "statics.csv");
  auto two = SelectRegions(snap, {"Nagaland", "Delhi"});
  EXPECT_EQ(two.Regions(), (std::vector<std::string>{"Nagaland", "Delhi"}));
  EXPECT_EQ(SelectRegions(snap, {}).Regions(), snap.Regions());
  EXPECT_THROW(SelectRegions(snap, {"Atlantis"}), Error);
}

}  // namespace
}  // namespace vacsim::pipeline
