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

#ifndef VACSIM_DATA_IO_H_
#define VACSIM_DATA_IO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vacsim/common.h"
#include "vacsim/env.h"
#include "vacsim/epi_engine.h"

namespace vacsim::data {

struct RegionStatic {
  std::string region;
  double population = 0.0;
  double hospital_beds = 0.0;
  double icu_beds = 0.0;
  double ventilators = 0.0;
  double age_over_50 = 0.0;

  void Validate() const;
  bool operator==(const RegionStatic&) const = default;
};

// Observed series and static attributes for the same set of regions, in the
// order of the statics file.
struct Snapshot {
  std::vector<epi::ObservedSeries> series;
  std::vector<RegionStatic> statics;
  // Hex SHA-256 over both source texts.
  std::string hash;

  std::vector<std::string> Regions() const;
  const epi::ObservedSeries& Series(std::string_view region) const;
  const RegionStatic& Static(std::string_view region) const;
};

std::string Sha256Hex(std::string_view bytes);
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

// Series CSV `date,region,confirmed,recovered,deaths`; regions keep their
// first-appearance order.
std::vector<epi::ObservedSeries> ParseSeriesCsv(std::string_view text,
                                                std::string source);
// Statics CSV `region,population,hospital_beds,icu_beds,ventilators,age_over_50`.
std::vector<RegionStatic> ParseStaticsCsv(std::string_view text,
                                          std::string source);

Snapshot LoadSnapshot(const std::filesystem::path& series_path,
                      const std::filesystem::path& statics_path);
Snapshot SnapshotFromText(std::string_view series_csv,
                          std::string_view statics_csv);

std::string FormatSeriesCsv(std::span<const epi::ObservedSeries> series);
std::string FormatStaticsCsv(std::span<const RegionStatic> statics);

using FitMap = std::map<std::string, epi::FitResult>;

// Fits every region's series against its static population. The seed of
// region i is seed + i.
FitMap FitSnapshot(const Snapshot& snapshot, const epi::FitOptions& options,
                   std::uint64_t seed);

// Farthest date past the last observation that may be projected.
inline constexpr int kMaxProjectionDays = 400;

// Model state of one region for each day in [first, last], read from the
// fitted trajectory started at the first observation. Days after the last
// observation are its continuation.
std::vector<epi::CompartmentState> ProjectedStates(const Snapshot& snapshot,
                                                   const FitMap& fits,
                                                   std::string_view region,
                                                   Date first, Date last);

env::StateContext MakeContext(const epi::CompartmentState& state,
                              const RegionStatic& statics, Date date);

// One sequence of contexts per day in [first, last], regions in snapshot
// order.
std::vector<std::vector<env::StateContext>> BuildContexts(
    const Snapshot& snapshot, const FitMap& fits, Date first, Date last);

}  // namespace vacsim::data

#endif  // VACSIM_DATA_IO_H_
