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

#include "vacsim/data_io.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "vacsim/csv.h"

namespace vacsim::data {
namespace {

const std::vector<std::string> kSeriesHeader = {"date", "region", "confirmed",
                                                "recovered", "deaths"};
const std::vector<std::string> kStaticsHeader = {
    "region", "population", "hospital_beds", "icu_beds", "ventilators", "age_over_50"};

Date ParseDateCell(const csv::Table& t, std::size_t row, int col) {
  try {
    return Date::Parse(t.rows[row][col]);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what(), t.Location(row, t.header[col]));
  }
}

}  // namespace

void RegionStatic::Validate() const {
  for (double v : {population, hospital_beds, icu_beds, ventilators, age_over_50}) {
    if (!std::isfinite(v) || v < 0) {
      throw Error(ErrorCode::kSchema, "static counts must be finite and >= 0", region);
    }
  }
  if (!(population > 0)) {
    throw Error(ErrorCode::kSchema, "population must be positive", region);
  }
  if (age_over_50 > population) {
    throw Error(ErrorCode::kSchema, "age_over_50 exceeds population", region);
  }
}

std::vector<std::string> Snapshot::Regions() const {
  std::vector<std::string> out;
  for (const auto& s : statics) out.push_back(s.region);
  return out;
}

const epi::ObservedSeries& Snapshot::Series(std::string_view region) const {
  for (const auto& s : series) {
    if (s.region == region) return s;
  }
  throw Error(ErrorCode::kNotFound, "no series for region " + std::string(region));
}

const RegionStatic& Snapshot::Static(std::string_view region) const {
  for (const auto& s : statics) {
    if (s.region == region) return s;
  }
  throw Error(ErrorCode::kNotFound, "no statics for region " + std::string(region));
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::vector<epi::ObservedSeries> ParseSeriesCsv(std::string_view text,
                                                std::string source) {
  csv::Table t = csv::ReadString(text, std::move(source));
  csv::RequireHeader(t, kSeriesHeader);
  std::vector<epi::ObservedSeries> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    epi::ObservationRow row;
    row.date = ParseDateCell(t, r, 0);
    const std::string& region = t.rows[r][1];
    if (region.empty()) {
      throw Error(ErrorCode::kSchema, "empty region", t.Location(r, "region"));
    }
    row.confirmed = static_cast<double>(csv::ParseInt(t, r, 2));
    row.recovered = static_cast<double>(csv::ParseInt(t, r, 3));
    row.deaths = static_cast<double>(csv::ParseInt(t, r, 4));
    auto [it, added] = index.try_emplace(region, out.size());
    if (added) out.push_back({region, {}});
    auto& series = out[it->second];
    if (row.confirmed < 0 || row.recovered < 0 || row.deaths < 0) {
      throw Error(ErrorCode::kSchema, "counts must be >= 0", t.Location(r, "confirmed"));
    }
    if (row.recovered + row.deaths > row.confirmed) {
      throw Error(ErrorCode::kSchema, "recovered + deaths exceeds confirmed",
                  t.Location(r, "confirmed"));
    }
    if (!series.rows.empty()) {
      const auto& prev = series.rows.back();
      if (!(prev.date < row.date)) {
        throw Error(ErrorCode::kSchema, "dates must be strictly increasing per region",
                    t.Location(r, "date"));
      }
      const char* column = row.confirmed < prev.confirmed   ? "confirmed"
                           : row.recovered < prev.recovered ? "recovered"
                           : row.deaths < prev.deaths       ? "deaths"
                                                            : nullptr;
      if (column) {
        throw Error(ErrorCode::kSchema,
                    std::string("cumulative ") + column + " decreased",
                    t.Location(r, column));
      }
    }
    series.rows.push_back(row);
  }
  return out;
}

std::vector<RegionStatic> ParseStaticsCsv(std::string_view text, std::string source) {
  csv::Table t = csv::ReadString(text, std::move(source));
  csv::RequireHeader(t, kStaticsHeader);
  std::vector<RegionStatic> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    RegionStatic s;
    s.region = t.rows[r][0];
    if (s.region.empty() || !seen.insert(s.region).second) {
      throw Error(ErrorCode::kSchema, "empty or duplicate region", t.Location(r, "region"));
    }
    s.population = csv::ParseDouble(t, r, 1);
    s.hospital_beds = csv::ParseDouble(t, r, 2);
    s.icu_beds = csv::ParseDouble(t, r, 3);
    s.ventilators = csv::ParseDouble(t, r, 4);
    s.age_over_50 = csv::ParseDouble(t, r, 5);
    try {
      s.Validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, e.what(), t.Location(r, "population"));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Snapshot SnapshotFromText(std::string_view series_csv, std::string_view statics_csv) {
  Snapshot snap;
  auto series = ParseSeriesCsv(series_csv, "series");
  snap.statics = ParseStaticsCsv(statics_csv, "statics");
  if (snap.statics.empty()) throw Error(ErrorCode::kSchema, "statics file has no regions");
  std::map<std::string, epi::ObservedSeries> by_region;
  for (auto& s : series) by_region.emplace(s.region, std::move(s));
  for (const auto& [region, s] : by_region) {
    if (std::none_of(snap.statics.begin(), snap.statics.end(),
                     [&](const RegionStatic& st) { return st.region == region; })) {
      throw Error(ErrorCode::kCoverage, "region " + region + " has no statics row");
    }
  }
  for (const auto& st : snap.statics) {
    auto it = by_region.find(st.region);
    if (it == by_region.end()) {
      throw Error(ErrorCode::kCoverage, "region " + st.region + " has no series rows");
    }
    snap.series.push_back(std::move(it->second));
  }
  // Length prefixes keep the two texts from aliasing each other.
  std::string material = "series:" + std::to_string(series_csv.size()) + "\n";
  material.append(series_csv);
  material += "statics:" + std::to_string(statics_csv.size()) + "\n";
  material.append(statics_csv);
  snap.hash = Sha256Hex(material);
  return snap;
}

Snapshot LoadSnapshot(const std::filesystem::path& series_path,
                      const std::filesystem::path& statics_path) {
  std::string series = ReadFileBytes(series_path);
  std::string statics = ReadFileBytes(statics_path);
  try {
    return SnapshotFromText(series, statics);
  } catch (const Error& e) {
    // Point the location at the file actually read.
    std::string loc = e.location();
    for (auto [tag, path] : {std::pair{"series", &series_path},
                             std::pair{"statics", &statics_path}}) {
      if (loc.rfind(tag, 0) == 0) loc = path->string() + loc.substr(std::string(tag).size());
    }
    throw Error(e.code(), e.what(), loc, e.stage());
  }
}

std::string FormatSeriesCsv(std::span<const epi::ObservedSeries> series) {
  std::string out = csv::JoinRow(kSeriesHeader);
  for (const auto& s : series) {
    for (const auto& r : s.rows) {
      out += csv::JoinRow({r.date.ToString(), s.region,
                           std::to_string(static_cast<long long>(r.confirmed)),
                           std::to_string(static_cast<long long>(r.recovered)),
                           std::to_string(static_cast<long long>(r.deaths))});
    }
  }
  return out;
}

std::string FormatStaticsCsv(std::span<const RegionStatic> statics) {
  std::string out = csv::JoinRow(kStaticsHeader);
  for (const auto& s : statics) {
    out += csv::JoinRow({s.region, csv::FormatDouble(s.population),
                         csv::FormatDouble(s.hospital_beds), csv::FormatDouble(s.icu_beds),
                         csv::FormatDouble(s.ventilators), csv::FormatDouble(s.age_over_50)});
  }
  return out;
}

FitMap FitSnapshot(const Snapshot& snapshot, const epi::FitOptions& options,
                   std::uint64_t seed) {
  FitMap fits;
  for (std::size_t i = 0; i < snapshot.statics.size(); ++i) {
    const auto& st = snapshot.statics[i];
    try {
      fits.emplace(st.region, epi::FitParams(snapshot.Series(st.region), st.population,
                                             options, seed + i));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (region " + st.region + ")",
                  e.location(), e.stage());
    }
  }
  return fits;
}

std::vector<epi::CompartmentState> ProjectedStates(const Snapshot& snapshot,
                                                   const FitMap& fits,
                                                   std::string_view region,
                                                   Date first, Date last) {
  if (last < first) throw Error(ErrorCode::kInvalidArgument, "window end precedes start");
  auto fit = fits.find(std::string(region));
  if (fit == fits.end()) {
    throw Error(ErrorCode::kCoverage, "no fitted parameters for " + std::string(region));
  }
  const auto& params = fit->second.params;
  const auto& rows = snapshot.Series(region).rows;
  const Date origin = rows.front().date;
  const Date anchor = rows.back().date;
  if (first < origin) {
    throw Error(ErrorCode::kCoverage,
                "window starts " + first.ToString() + " before the first observation " +
                    origin.ToString() + " of " + std::string(region));
  }
  if (last - anchor > kMaxProjectionDays) {
    throw Error(ErrorCode::kCoverage, "window ends beyond the projectable range");
  }
  // One integration from the first observation covers both the fitted days
  // and the projection, so contexts stay continuous across the last
  // observation.
  auto traj = epi::Integrate(epi::InitialStateFromObservation(rows.front(), params.population_n),
                             params, std::max(1, last - origin));
  std::vector<epi::CompartmentState> out;
  out.reserve(last - first + 1);
  for (Date d = first; d <= last; d = d + 1) out.push_back(traj.states[d - origin]);
  return out;
}

env::StateContext MakeContext(const epi::CompartmentState& state,
                              const RegionStatic& statics, Date date) {
  epi::Trajectory single;
  single.start_date = date;
  single.states = {state};
  auto rates = epi::DeriveRates(single);
  env::StateContext c;
  c.total_predicted_cases = rates.total_predicted_cases;
  c.predicted_death_rate = rates.death_rate;
  c.predicted_recovery_rate = rates.recovery_rate;
  c.population = statics.population;
  c.susceptible = std::clamp(statics.population - rates.total_predicted_cases, 0.0,
                             statics.population);
  c.icu_beds = statics.icu_beds;
  c.hospital_beds = statics.hospital_beds;
  c.ventilators = statics.ventilators;
  c.age_over_50 = statics.age_over_50;
  c.region = statics.region;
  c.date = date;
  c.Validate();
  return c;
}

std::vector<std::vector<env::StateContext>> BuildContexts(const Snapshot& snapshot,
                                                          const FitMap& fits,
                                                          Date first, Date last) {
  const int days = last - first + 1;
  if (days < 1) throw Error(ErrorCode::kInvalidArgument, "window end precedes start");
  std::vector<std::vector<env::StateContext>> out(days);
  for (const auto& st : snapshot.statics) {
    auto states = ProjectedStates(snapshot, fits, st.region, first, last);
    for (int d = 0; d < days; ++d) out[d].push_back(MakeContext(states[d], st, first + d));
  }
  return out;
}

}  // namespace vacsim::data
