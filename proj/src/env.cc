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

#include "vacsim/env.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "vacsim/csv.h"

namespace vacsim::env {

Observation StateContext::Features() const {
  return {total_predicted_cases, predicted_death_rate, predicted_recovery_rate,
          susceptible,           population,           icu_beds,
          hospital_beds,         ventilators,          age_over_50};
}

std::array<const char*, kNumFeatures> FeatureNames() {
  return {"total_predicted_cases", "death_rate",  "recovery_rate",
          "susceptible",           "population",  "icu_beds",
          "hospital_beds",         "ventilators", "age_over_50"};
}

void StateContext::Validate() const {
  auto f = Features();
  for (double v : f) {
    if (!std::isfinite(v) || v < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "context features must be finite and >= 0", region);
    }
  }
  if (susceptible > population) {
    throw Error(ErrorCode::kInvalidArgument, "susceptible exceeds population",
                region);
  }
  if (predicted_death_rate > 100 || predicted_recovery_rate > 100) {
    throw Error(ErrorCode::kInvalidArgument, "rates must lie in [0, 100]",
                region);
  }
}

FeatureScaling FeatureScaling::Fit(std::span<const StateContext> contexts) {
  FeatureScaling scaling;
  if (contexts.empty()) return scaling;
  for (int j = 0; j < kNumFeatures; ++j) {
    scaling.ranges[j] = {std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity()};
  }
  for (const auto& c : contexts) {
    auto f = c.Features();
    for (int j = 0; j < kNumFeatures; ++j) {
      scaling.ranges[j].min = std::min(scaling.ranges[j].min, f[j]);
      scaling.ranges[j].max = std::max(scaling.ranges[j].max, f[j]);
    }
  }
  return scaling;
}

Observation FeatureScaling::Apply(const Observation& raw) const {
  Observation out{};
  for (int j = 0; j < kNumFeatures; ++j) {
    const auto& r = ranges[j];
    double span = r.max - r.min;
    out[j] = span > 0 ? std::clamp((raw[j] - r.min) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

Observation FeatureScaling::Apply(const StateContext& context) const {
  return Apply(context.Features());
}

void EnvConfig::Validate() const {
  if (bucket_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "bucket_size must be >= 2");
  }
  if (recipients_per_day < 1) {
    throw Error(ErrorCode::kInvalidArgument, "recipients_per_day must be >= 1");
  }
  if (!(reward_width > 0) || !std::isfinite(reward_width)) {
    throw Error(ErrorCode::kInvalidArgument, "reward_width must be > 0");
  }
  if (!(efficacy >= 0 && efficacy <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "efficacy must lie in [0, 1]");
  }
  if (!(batch_size >= 0) || !std::isfinite(batch_size)) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 0");
  }
}

double Reward(double allocation_fraction, double susceptible_fraction,
              double width) {
  double d = allocation_fraction - susceptible_fraction;
  return std::max(std::exp(-d * d / width),
                  std::numeric_limits<double>::min());
}

int OptimalAction(double susceptible_fraction, int bucket_size) {
  double target = susceptible_fraction * bucket_size;
  int lo = std::clamp(static_cast<int>(std::floor(target)), 0, bucket_size - 1);
  int hi = std::clamp(lo + 1, 0, bucket_size - 1);
  double dlo = std::abs(static_cast<double>(lo) / bucket_size - susceptible_fraction);
  double dhi = std::abs(static_cast<double>(hi) / bucket_size - susceptible_fraction);
  return dhi <= dlo ? hi : lo;
}

std::vector<double> SusceptibleFractions(std::span<const StateContext> day) {
  double total = 0.0;
  for (const auto& c : day) total += c.susceptible;
  std::vector<double> out;
  out.reserve(day.size());
  for (const auto& c : day) {
    out.push_back(total > 0 ? c.susceptible / total
                            : 1.0 / static_cast<double>(day.size()));
  }
  return out;
}

VaccineEnv::VaccineEnv(EnvConfig config) : config_(std::move(config)) {
  config_.Validate();
}

Observation VaccineEnv::Reset(std::vector<StateContext> day_contexts) {
  if (static_cast<int>(day_contexts.size()) != config_.recipients_per_day) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(config_.recipients_per_day) +
                    " recipients, got " + std::to_string(day_contexts.size()));
  }
  for (const auto& c : day_contexts) {
    c.Validate();
    if (c.date != day_contexts.front().date) {
      throw Error(ErrorCode::kInvalidArgument,
                  "all recipients of one episode must share a date");
    }
  }
  contexts_ = std::move(day_contexts);
  observations_.clear();
  for (const auto& c : contexts_) observations_.push_back(config_.scaling.Apply(c));
  susceptible_fractions_ = SusceptibleFractions(contexts_);
  cursor_ = 0;
  return observations_.front();
}

StepOutcome VaccineEnv::Step(int action) {
  RequireInitialized();
  if (done()) throw Error(ErrorCode::kInvalidArgument, "step after episode end");
  if (action < 0 || action >= config_.bucket_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "action " + std::to_string(action) + " out of range");
  }
  StepOutcome out;
  out.info.recipient = cursor_;
  out.info.allocation_fraction =
      static_cast<double>(action) / config_.bucket_size;
  out.info.susceptible_fraction = susceptible_fractions_[cursor_];
  out.reward = Reward(out.info.allocation_fraction,
                      out.info.susceptible_fraction, config_.reward_width);
  ++cursor_;
  out.done = done();
  if (!out.done) out.observation = observations_[cursor_];
  return out;
}

int VaccineEnv::OptimalAction(int recipient) const {
  RequireInitialized();
  return env::OptimalAction(SusceptibleFraction(recipient), config_.bucket_size);
}

double VaccineEnv::SusceptibleFraction(int recipient) const {
  RequireInitialized();
  return susceptible_fractions_.at(recipient);
}

const Observation& VaccineEnv::ObservationOf(int recipient) const {
  RequireInitialized();
  return observations_.at(recipient);
}

void VaccineEnv::RequireInitialized() const {
  if (contexts_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "environment not reset");
  }
}

namespace {
const std::vector<std::string> kContextHeader = {
    "date",       "region",   "total_predicted_cases",
    "death_rate", "recovery_rate", "susceptible",
    "population", "icu_beds", "hospital_beds",
    "ventilators", "age_over_50"};
}  // namespace

std::vector<StateContext> ReadContextsCsv(const std::filesystem::path& path) {
  auto table = csv::ReadFile(path);
  csv::RequireHeader(table, kContextHeader);
  std::vector<StateContext> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    StateContext c;
    try {
      c.date = Date::Parse(table.rows[r][0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, e.what(), table.Location(r, "date"));
    }
    c.region = table.rows[r][1];
    double* fields[] = {&c.total_predicted_cases, &c.predicted_death_rate,
                        &c.predicted_recovery_rate, &c.susceptible,
                        &c.population, &c.icu_beds, &c.hospital_beds,
                        &c.ventilators, &c.age_over_50};
    for (int j = 0; j < kNumFeatures; ++j) {
      *fields[j] = csv::ParseDouble(table, r, j + 2);
    }
    try {
      c.Validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, e.what(), table.source + ":" +
                                                    std::to_string(table.lines[r]));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string FormatContextsCsv(std::span<const StateContext> contexts) {
  std::string out = csv::JoinRow(kContextHeader);
  for (const auto& c : contexts) {
    std::vector<std::string> row = {c.date.ToString(), c.region};
    for (double v : c.Features()) row.push_back(csv::FormatDouble(v));
    out += csv::JoinRow(row);
  }
  return out;
}

void WriteContextsCsv(const std::filesystem::path& path,
                      std::span<const StateContext> contexts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << FormatContextsCsv(contexts);
}

std::map<Date, std::vector<StateContext>> GroupByDate(
    std::span<const StateContext> contexts) {
  std::map<Date, std::vector<StateContext>> out;
  for (const auto& c : contexts) out[c.date].push_back(c);
  return out;
}

}  // namespace vacsim::env
