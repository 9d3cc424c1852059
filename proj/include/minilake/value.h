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

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace minilake {

enum class ColumnType { kBool, kInt64, kFloat64, kString, kDate, kTimestamp };

std::string_view ColumnTypeName(ColumnType type);
std::optional<ColumnType> ParseColumnType(std::string_view name);

/// Days since 1970-01-01.
struct Date {
  std::int32_t days = 0;
  auto operator<=>(const Date&) const = default;
};

/// Microseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t micros = 0;
  auto operator<=>(const Timestamp&) const = default;
};

/// A single cell. std::monostate is SQL NULL.
using Value =
    std::variant<std::monostate, bool, std::int64_t, double, std::string, Date, Timestamp>;

using Row = std::vector<Value>;

inline bool IsNull(const Value& value) {
  return std::holds_alternative<std::monostate>(value);
}

std::optional<ColumnType> TypeOf(const Value& value);

/// Null matches every type.
bool ValueMatchesType(const Value& value, ColumnType type);

/// Total order within one non-null type: numeric for numbers, false < true,
/// byte-lexicographic for strings, chronological for dates and timestamps.
/// Both operands must be non-null and of the same type.
std::strong_ordering CompareValues(const Value& lhs, const Value& rhs);

// Proleptic Gregorian calendar helpers.
struct CivilDate {
  std::int64_t year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31
};
std::int64_t DaysFromCivil(std::int64_t year, unsigned month, unsigned day);
CivilDate CivilFromDays(std::int64_t days);
std::int64_t FloorDiv(std::int64_t value, std::int64_t divisor);

inline constexpr std::int64_t kMicrosPerDay = 86'400'000'000;

std::string FormatDate(Date date);
std::optional<Date> ParseDate(std::string_view text);
std::string FormatTimestamp(Timestamp ts);
std::optional<Timestamp> ParseTimestamp(std::string_view text);

/// Shortest decimal that round-trips; -0.0 prints as "0".
std::string FormatDouble(double value);

/// Canonical text for a non-null value, used for column statistics, partition
/// values, CSV output and predicate literals.
std::string FormatValue(const Value& value);

/// Inverse of FormatValue. Returns nullopt when `text` is not a valid
/// rendering of `type`.
std::optional<Value> ParseValue(ColumnType type, std::string_view text);

bool IsValidUtf8(std::string_view text);

/// The first `count` Unicode scalar values of a valid UTF-8 string.
std::string_view Utf8Prefix(std::string_view text, std::int64_t count);

}  // namespace minilake
