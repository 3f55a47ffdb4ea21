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

#include <gtest/gtest.h>

#include "vacsim/common.h"
#include "vacsim/csv.h"

namespace vacsim {
namespace {

TEST(Date, ParseFormatRoundTrip) {
  Date d = Date::Parse("2020-12-31");
  EXPECT_EQ(d.ToString(), "2020-12-31");
  EXPECT_EQ((d + 1).ToString(), "2021-01-01");
  EXPECT_EQ(Date(2021, 1, 1) - Date(2020, 12, 1), 31);
  EXPECT_LT(Date(2020, 11, 30), Date(2020, 12, 1));
}

TEST(Date, RejectsMalformed) {
  EXPECT_THROW(Date::Parse("2020-13-01"), Error);
  EXPECT_THROW(Date::Parse("31/12/2020"), Error);
  EXPECT_THROW(Date::Parse(""), Error);
}

TEST(Error, WithStageKeepsCodeAndLocation) {
  Error e(ErrorCode::kSchema, "bad", "file.csv:3 column x");
  Error labelled = e.WithStage("ingest");
  EXPECT_EQ(labelled.code(), ErrorCode::kSchema);
  EXPECT_EQ(labelled.location(), "file.csv:3 column x");
  EXPECT_EQ(labelled.stage(), "ingest");
}

TEST(Csv, ReadAndLocate) {
  auto t = csv::ReadString("a,b\n1,2\n\n3,x\n", "mem.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.Column("b"), 1);
  EXPECT_DOUBLE_EQ(csv::ParseDouble(t, 0, 1), 2.0);
  try {
    csv::ParseDouble(t, 1, 1);
    FAIL() << "expected a schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(e.location().find("mem.csv:4"), std::string::npos) << e.location();
    EXPECT_NE(e.location().find("b"), std::string::npos);
  }
}

TEST(Csv, MissingColumnIsSchemaError) {
  auto t = csv::ReadString("a\n1\n", "mem.csv");
  EXPECT_THROW(t.Column("z"), Error);
  EXPECT_THROW(csv::RequireHeader(t, {"a", "b"}), Error);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    auto t = csv::ReadString("v\n" + csv::FormatDouble(v) + "\n", "mem");
    EXPECT_EQ(csv::ParseDouble(t, 0, 0), v);
  }
}

TEST(Csv, JoinRowTerminatesLine) {
  EXPECT_EQ(csv::JoinRow({"a", "b"}), "a,b\n");
}

}  // namespace
}  // namespace vacsim
