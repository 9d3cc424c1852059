/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "minilake/error.h"
#include "minilake/schema.h"
#include "minilake/value.h"
#include "test_util.h"

namespace minilake {
namespace {

using testing::OracleDaysFromCivil;
using testing::OracleMicros;

TEST(CivilDateTest, MatchesTimegmOverFourCenturies) {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const int year = std::uniform_int_distribution<int>(1800, 2200)(rng);
    const int month = std::uniform_int_distribution<int>(1, 12)(rng);
    const int day = std::uniform_int_distribution<int>(1, 28)(rng);
    const std::int64_t days = DaysFromCivil(year, month, day);
    EXPECT_EQ(days, OracleDaysFromCivil(year, month, day));
    const CivilDate back = CivilFromDays(days);
    EXPECT_EQ(back.year, year);
    EXPECT_EQ(back.month, static_cast<unsigned>(month));
    EXPECT_EQ(back.day, static_cast<unsigned>(day));
  }
}

TEST(DateTextTest, RoundTrips) {
  EXPECT_EQ(FormatDate(Date{0}), "1970-01-01");
  EXPECT_EQ(FormatDate(Date{-1}), "1969-12-31");
  auto leap = ParseDate("2024-02-29");
  ASSERT_TRUE(leap);
  EXPECT_EQ(leap->days, OracleDaysFromCivil(2024, 2, 29));
  EXPECT_FALSE(ParseDate("2023-02-29"));
  EXPECT_FALSE(ParseDate("2023-13-01"));
  EXPECT_FALSE(ParseDate("2023-1-01"));
  EXPECT_FALSE(ParseDate("2023-01-01x"));
}

TEST(TimestampTextTest, RoundTripsWithMicros) {
  const Timestamp ts{OracleMicros(2023, 7, 15, 12, 30, 5, 250)};
  EXPECT_EQ(FormatTimestamp(ts), "2023-07-15T12:30:05.000250Z");
  EXPECT_EQ(ParseTimestamp("2023-07-15T12:30:05.000250Z"), ts);
  EXPECT_EQ(ParseTimestamp("2023-07-01T00:00:00Z")->micros, OracleMicros(2023, 7, 1, 0, 0, 0));
  EXPECT_EQ(ParseTimestamp("2023-07-01T00:00:00.5Z")->micros,
            OracleMicros(2023, 7, 1, 0, 0, 0, 500000));
  EXPECT_EQ(FormatTimestamp(Timestamp{-1}), "1969-12-31T23:59:59.999999Z");
  EXPECT_FALSE(ParseTimestamp("2023-07-01T00:00:00"));
  EXPECT_FALSE(ParseTimestamp("2023-07-01T24:00:00Z"));
  EXPECT_FALSE(ParseTimestamp("2023-07-01T00:00:00.1234567Z"));
}

TEST(FormatValueTest, CanonicalForms) {
  EXPECT_EQ(FormatValue(Value(std::int64_t{-42})), "-42");
  EXPECT_EQ(FormatValue(Value(true)), "true");
  EXPECT_EQ(FormatValue(Value(0.1)), "0.1");
  EXPECT_EQ(FormatValue(Value(-0.0)), "0");
  EXPECT_EQ(FormatValue(Value(1e300)), "1e+300");
  EXPECT_EQ(FormatValue(Value(std::string("héllo"))), "héllo");
}

TEST(ParseValueTest, InvertsFormatForRandomValues) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto bits = rng();
    double d;
    std::memcpy(&d, &bits, sizeof d);
    if (!std::isfinite(d)) continue;
    auto back = ParseValue(ColumnType::kFloat64, FormatValue(Value(d)));
    ASSERT_TRUE(back);
    EXPECT_EQ(std::get<double>(*back), d == 0.0 ? 0.0 : d);
    const auto n = static_cast<std::int64_t>(rng());
    EXPECT_EQ(ParseValue(ColumnType::kInt64, FormatValue(Value(n))), Value(n));
  }
}

TEST(ParseValueTest, RejectsMalformedText) {
  EXPECT_FALSE(ParseValue(ColumnType::kInt64, "+5"));
  EXPECT_FALSE(ParseValue(ColumnType::kInt64, "5.0"));
  EXPECT_FALSE(ParseValue(ColumnType::kInt64, "99999999999999999999"));
  EXPECT_FALSE(ParseValue(ColumnType::kFloat64, "nan"));
  EXPECT_FALSE(ParseValue(ColumnType::kFloat64, "inf"));
  EXPECT_FALSE(ParseValue(ColumnType::kBool, "TRUE"));
  EXPECT_FALSE(ParseValue(ColumnType::kString, std::string("\xff")));
}

TEST(CompareValuesTest, OrdersWithinType) {
  EXPECT_EQ(CompareValues(Value(false), Value(true)), std::strong_ordering::less);
  EXPECT_EQ(CompareValues(Value(std::string("a")), Value(std::string("\xc3\xa9"))),
            std::strong_ordering::less);
  EXPECT_EQ(CompareValues(Value(-0.0), Value(0.0)), std::strong_ordering::equal);
  EXPECT_EQ(CompareValues(Value(Date{3}), Value(Date{2})), std::strong_ordering::greater);
}

TEST(Utf8Test, ValidatesAndTruncatesByCodePoint) {
  EXPECT_TRUE(IsValidUtf8("plain"));
  EXPECT_TRUE(IsValidUtf8("\xe2\x82\xac"));
  EXPECT_FALSE(IsValidUtf8("\xe2\x82"));
  EXPECT_FALSE(IsValidUtf8("\xc0\x80"));
  EXPECT_FALSE(IsValidUtf8("\xed\xa0\x80"));
  EXPECT_EQ(Utf8Prefix("\xe2\x82\xac" "ab", 2), "\xe2\x82\xac" "a");
  EXPECT_EQ(Utf8Prefix("ab", 5), "ab");
}

TEST(SchemaTextTest, ParsesAndAssignsIds) {
  const Schema s = ParseSchemaText("id:int64:required, name:string,ts:timestamp");
  ASSERT_EQ(s.fields.size(), 3u);
  EXPECT_EQ(s.fields[0].id, 1);
  EXPECT_TRUE(s.fields[0].required);
  EXPECT_EQ(s.fields[2].type, ColumnType::kTimestamp);
  EXPECT_THROW(ParseSchemaText("a:int64,a:string"), Error);
  EXPECT_THROW(ParseSchemaText("a:int32"), Error);
  EXPECT_THROW(ParseSchemaText("1a:int64"), Error);
}

TEST(ValidateRowTest, RejectsViolations) {
  const Schema s = ParseSchemaText("id:int64:required,x:float64");
  EXPECT_NO_THROW(ValidateRow(s, {Value(std::int64_t{1}), Value()}));
  auto code = [&](const Row& row) {
    try {
      ValidateRow(s, row);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code({Value(), Value(1.0)}), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code({Value(std::int64_t{1})}), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code({Value(std::int64_t{1}), Value(std::string("x"))}), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code({Value(std::int64_t{1}), Value(std::numeric_limits<double>::quiet_NaN())}),
            ErrorCode::kSchemaViolation);
}

}  // namespace
}  // namespace minilake
