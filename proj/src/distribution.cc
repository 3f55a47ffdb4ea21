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

#include "vacsim/distribution.h"

#include <cmath>
#include <map>

#include "vacsim/csv.h"

namespace vacsim {

void DistributionSet::Validate() const {
  double sum = 0.0;
  for (const auto& s : shares) {
    if (!std::isfinite(s.percent) || s.percent < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative or non-finite share", s.region);
    }
    sum += s.percent;
  }
  if (shares.empty() || std::abs(sum - 100.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "shares must sum to 100");
  }
}

double DistributionSet::PercentOf(std::string_view region) const {
  for (const auto& s : shares) {
    if (s.region == region) return s.percent;
  }
  throw Error(ErrorCode::kNotFound, "region " + std::string(region) + " not in distribution");
}

std::vector<double> DistributionSet::Percents() const {
  std::vector<double> out;
  out.reserve(shares.size());
  for (const auto& s : shares) out.push_back(s.percent);
  return out;
}

DistributionSet Proportional(std::span<const std::pair<std::string, double>> weights,
                             Date date, int bucket_size) {
  double total = 0.0;
  for (const auto& [region, w] : weights) {
    if (!std::isfinite(w) || w < 0) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be finite and >= 0", region);
    }
    total += w;
  }
  if (!(total > 0)) {
    throw Error(ErrorCode::kDegenerate, "allocation is all zero");
  }
  DistributionSet set{date, bucket_size, {}};
  for (const auto& [region, w] : weights) set.shares.push_back({region, 100.0 * w / total});
  return set;
}

std::string FormatDistributionCsv(std::span<const DistributionSet> sets) {
  std::string out = csv::JoinRow({"date", "region", "percent"});
  for (const auto& set : sets) {
    for (const auto& s : set.shares) {
      out += csv::JoinRow({set.date.ToString(), s.region, csv::FormatDouble(s.percent)});
    }
  }
  return out;
}

std::vector<DistributionSet> ParseDistributionCsv(std::string_view text,
                                                  std::string source,
                                                  int bucket_size) {
  csv::Table t = csv::ReadString(text, std::move(source));
  csv::RequireHeader(t, {"date", "region", "percent"});
  std::vector<DistributionSet> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Date d;
    try {
      d = Date::Parse(t.rows[r][0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, e.what(), t.Location(r, "date"));
    }
    if (out.empty() || out.back().date != d) out.push_back({d, bucket_size, {}});
    out.back().shares.push_back({t.rows[r][1], csv::ParseDouble(t, r, 2)});
  }
  return out;
}

nlohmann::json ToJson(const DistributionSet& set) {
  nlohmann::json shares = nlohmann::json::array();
  for (const auto& s : set.shares) shares.push_back({{"region", s.region}, {"percent", s.percent}});
  return {{"date", set.date.ToString()}, {"bucket_size", set.bucket_size}, {"shares", shares}};
}

DistributionSet DistributionFromJson(const nlohmann::json& doc) {
  try {
    DistributionSet set;
    set.date = Date::Parse(doc.at("date").get<std::string>());
    set.bucket_size = doc.at("bucket_size").get<int>();
    for (const auto& s : doc.at("shares")) {
      set.shares.push_back({s.at("region").get<std::string>(), s.at("percent").get<double>()});
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("distribution: ") + e.what());
  }
}

}  // namespace vacsim
