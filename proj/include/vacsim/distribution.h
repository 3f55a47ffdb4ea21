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

#ifndef VACSIM_DISTRIBUTION_H_
#define VACSIM_DISTRIBUTION_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "vacsim/common.h"

namespace vacsim {

struct RegionShare {
  std::string region;
  double percent = 0.0;
  bool operator==(const RegionShare&) const = default;
};

// Percentage split of one batch across regions on one date.
struct DistributionSet {
  Date date;
  int bucket_size = 0;
  std::vector<RegionShare> shares;

  // Shares >= 0 and summing to 100 within 1e-6.
  void Validate() const;
  double PercentOf(std::string_view region) const;
  std::vector<double> Percents() const;
  bool operator==(const DistributionSet&) const = default;
};

// percent_i = 100 * weight_i / sum(weights). Throws kDegenerate when no
// weight is positive.
DistributionSet Proportional(std::span<const std::pair<std::string, double>> weights,
                             Date date, int bucket_size);

// CSV `date,region,percent`.
std::string FormatDistributionCsv(std::span<const DistributionSet> sets);
std::vector<DistributionSet> ParseDistributionCsv(std::string_view text,
                                                  std::string source,
                                                  int bucket_size);

nlohmann::json ToJson(const DistributionSet& set);
DistributionSet DistributionFromJson(const nlohmann::json& doc);

}  // namespace vacsim

#endif  // VACSIM_DISTRIBUTION_H_
