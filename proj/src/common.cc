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

#include "vacsim/common.h"

#include <cmath>
#include <cstdio>

namespace vacsim {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kCoverage: return "coverage";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kNonConvergence: return "non_convergence";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kIterationCap: return "iteration_cap";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kNotReady: return "not_ready";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kOutOfOrder: return "out_of_order";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string location,
             std::string stage)
    : std::runtime_error(message),
      code_(code),
      location_(std::move(location)),
      stage_(std::move(stage)) {}

Error Error::WithStage(std::string stage) const {
  return Error(code_, what(), location_, std::move(stage));
}

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year(year),
                                  std::chrono::month(month),
                                  std::chrono::day(day)};
  if (!ymd.ok()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid calendar date");
  }
  days_ = std::chrono::sys_days(ymd);
}

Date Date::Parse(std::string_view iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  std::string buf(iso);
  if (buf.size() != 10 ||
      std::sscanf(buf.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw Error(ErrorCode::kSchema, "malformed date '" + buf + "'");
  }
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m),
                                  std::chrono::day(d)};
  if (!ymd.ok()) throw Error(ErrorCode::kSchema, "invalid date '" + buf + "'");
  return Date(std::chrono::sys_days(ymd));
}

std::string Date::ToString() const {
  std::chrono::year_month_day ymd(days_);
  char out[16];
  std::snprintf(out, sizeof(out), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return out;
}

void RequireFinite(double value, std::string_view what) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be finite");
  }
}

}  // namespace vacsim
