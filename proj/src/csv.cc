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

#include "vacsim/csv.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vacsim/common.h"

namespace vacsim::csv {
namespace {

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - start);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
      field.pop_back();
    }
    std::size_t lead = field.find_first_not_of(" \t");
    out.push_back(lead == std::string::npos ? std::string() : field.substr(lead));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int Table::Column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw Error(ErrorCode::kSchema, "missing column '" + std::string(name) + "'",
              source + ":1");
}

std::string Table::Location(std::size_t row, std::string_view column) const {
  return source + ":" + std::to_string(lines.at(row)) + " column " +
         std::string(column);
}

Table Read(std::istream& in, std::string source) {
  Table table;
  table.source = std::move(source);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = Split(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::kSchema,
                  "expected " + std::to_string(table.header.size()) +
                      " fields, found " + std::to_string(fields.size()),
                  table.source + ":" + std::to_string(line_no));
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(line_no);
  }
  if (!have_header) {
    throw Error(ErrorCode::kSchema, "empty file", table.source);
  }
  return table;
}

Table ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return Read(in, path.filename().string());
}

Table ReadString(std::string_view text, std::string source) {
  std::istringstream in{std::string(text)};
  return Read(in, std::move(source));
}

void RequireHeader(const Table& table, const std::vector<std::string>& expected,
                   bool allow_extra) {
  bool ok = allow_extra ? table.header.size() >= expected.size()
                        : table.header.size() == expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) {
    ok = table.header[i] == expected[i];
  }
  if (!ok) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw Error(ErrorCode::kSchema, "header must be '" + want + "'",
                table.source + ":1");
  }
}

double ParseDouble(const Table& table, std::size_t row, int column) {
  const std::string& field = table.rows.at(row).at(column);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    throw Error(ErrorCode::kSchema, "not a number: '" + field + "'",
                table.Location(row, table.header[column]));
  }
  return value;
}

long long ParseInt(const Table& table, std::size_t row, int column) {
  const std::string& field = table.rows.at(row).at(column);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kSchema, "not an integer: '" + field + "'",
                table.Location(row, table.header[column]));
  }
  return value;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string JoinRow(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

}  // namespace vacsim::csv
