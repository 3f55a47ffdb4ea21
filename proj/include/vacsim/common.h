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

#ifndef VACSIM_COMMON_H_
#define VACSIM_COMMON_H_

#include <chrono>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vacsim {

enum class ErrorCode {
  kInvalidArgument,
  kSchema,
  kCoverage,
  kDegenerate,
  kNonConvergence,
  kDivergence,
  kIterationCap,
  kNotFound,
  kNotReady,
  kConflict,
  kOutOfOrder,
  kIo,
};

std::string_view ToString(ErrorCode code);

// Every failure in the library is reported as an Error. `stage` is filled in
// by the pipeline when a sub-module failure propagates; `location` names the
// offending row/column for schema errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string location = {},
        std::string stage = {});

  ErrorCode code() const { return code_; }
  const std::string& location() const { return location_; }
  const std::string& stage() const { return stage_; }

  Error WithStage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string location_;
  std::string stage_;
};

// Calendar date with day arithmetic. Serialized as ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  static Date Parse(std::string_view iso);

  std::string ToString() const;
  std::chrono::sys_days days() const { return days_; }

  Date operator+(int n) const { return Date(days_ + std::chrono::days(n)); }
  Date operator-(int n) const { return Date(days_ - std::chrono::days(n)); }
  int operator-(const Date& other) const {
    return static_cast<int>((days_ - other.days_).count());
  }
  auto operator<=>(const Date&) const = default;
  bool operator==(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

void RequireFinite(double value, std::string_view what);

}  // namespace vacsim

#endif  // VACSIM_COMMON_H_
