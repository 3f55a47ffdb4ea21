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

// Regenerates the bundled synthetic fixtures under data/fixtures.
//
//   make_fixtures <fixture root>
//
// Each region's series is an exact SEIRD integration from a chosen first
// observation, rounded to whole persons.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "vacsim/data_io.h"
#include "vacsim/epi_engine.h"

namespace {

using namespace vacsim;

struct RegionSetup {
  data::RegionStatic statics;
  epi::EpiParams params;
  epi::ObservationRow first;
};

epi::ObservedSeries Synthesize(const RegionSetup& setup, Date start, int days) {
  auto initial = epi::InitialStateFromObservation(setup.first, setup.statics.population);
  auto traj = epi::Integrate(initial, setup.params, days - 1, epi::kDefaultDt, start);
  epi::ObservedSeries out{setup.statics.region, {}};
  for (int d = 0; d < days; ++d) {
    const auto& s = traj.states[d];
    out.rows.push_back({start + d, std::round(s.infected + s.recovered + s.dead),
                        std::round(s.recovered), std::round(s.dead)});
  }
  out.Validate();
  return out;
}

void Write(const std::filesystem::path& dir, const std::vector<RegionSetup>& setups,
           const nlohmann::json& config) {
  std::filesystem::create_directories(dir);
  std::vector<epi::ObservedSeries> series;
  std::vector<data::RegionStatic> statics;
  const Date start{2020, 11, 1};
  const int days = (Date{2020, 12, 26} - start) + 1;
  for (const auto& s : setups) {
    series.push_back(Synthesize(s, start, days));
    statics.push_back(s.statics);
  }
  data::WriteFileBytes(dir / "series.csv", data::FormatSeriesCsv(series));
  data::WriteFileBytes(dir / "statics.csv", data::FormatStaticsCsv(statics));
  data::WriteFileBytes(dir / "config.json", config.dump(2) + "\n");
  auto a2c = config;
  a2c["agent"] = "actor-critic";
  data::WriteFileBytes(dir / "config_a2c.json", a2c.dump(2) + "\n");
}

RegionSetup Region(std::string name, double population, double beds, double icu, double vents,
                  double over50, double beta, double active, double recovered) {
  RegionSetup r;
  r.statics = {std::move(name), population, beds, icu, vents, over50};
  r.params = {beta, 1.0 / 5.2, 0.1, 0.0015, population};
  const double deaths = std::round(recovered * 0.012);
  r.first = {Date{2020, 11, 1}, active + recovered + deaths, recovered, deaths};
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <fixture root>\n";
    return 2;
  }
  const std::filesystem::path root = argv[1];
  nlohmann::json config = {{"series", "series.csv"},
                           {"statics", "statics.csv"},
                           {"output_dir", "runs"}};

  // Delhi and Maharashtra carry most active infections but are past their
  // peak; the three smaller outbreaks are still growing. Susceptible shares
  // therefore diverge from infected shares.
  std::vector<RegionSetup> five_states = {
      Region("Assam", 31'205'576, 17'000, 1'700, 600, 5'900'000, 0.14, 2'000, 200'000),
      Region("Delhi", 16'787'941, 24'000, 2'400, 1'100, 3'100'000, 0.085, 30'000, 350'000),
      Region("Jharkhand", 32'988'134, 19'000, 1'500, 500, 5'300'000, 0.14, 1'500, 100'000),
      Region("Maharashtra", 112'374'333, 100'000, 10'000, 3'700, 24'000'000, 0.085, 120'000,
             1'500'000),
      Region("Nagaland", 1'978'502, 2'000, 200, 60, 330'000, 0.14, 300, 8'000)};
  Write(root / "five_states", five_states, config);

  std::vector<RegionSetup> symmetric;
  for (const char* name : {"R1", "R2", "R3", "R4", "R5"}) {
    symmetric.push_back(
        Region(name, 10'000'000, 10'000, 1'000, 400, 2'000'000, 0.12, 5'000, 50'000));
  }
  auto sym_config = config;
  sym_config["regions"] = {"R1", "R2", "R3", "R4", "R5"};
  Write(root / "symmetric", symmetric, sym_config);
  std::cout << "fixtures written to " << root << "\n";
  return 0;
}
