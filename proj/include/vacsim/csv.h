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

#ifndef VACSIM_CSV_H_
#define VACSIM_CSV_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vacsim::csv {

// Minimal comma-separated reader: no quoting, blank lines skipped, CR stripped.
struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number in the source for each row (header is line 1).
  std::vector<int> lines;

  int Column(std::string_view name) const;
  std::string Location(std::size_t row, std::string_view column) const;
};

Table Read(std::istream& in, std::string source);
Table ReadFile(const std::filesystem::path& path);
Table ReadString(std::string_view text, std::string source);

// Throws kSchema unless the header is exactly `expected` (a prefix match is
// allowed when `allow_extra` is set).
void RequireHeader(const Table& table, const std::vector<std::string>& expected,
                   bool allow_extra = false);

double ParseDouble(const Table& table, std::size_t row, int column);
long long ParseInt(const Table& table, std::size_t row, int column);

// Shortest representation that round-trips exactly.
std::string FormatDouble(double value);

// One line, newline-terminated.
std::string JoinRow(const std::vector<std::string>& fields);

}  // namespace vacsim::csv

#endif  // VACSIM_CSV_H_
