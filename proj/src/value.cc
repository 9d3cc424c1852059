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

#include "minilake/value.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <system_error>

namespace minilake {

std::string_view ColumnTypeName(ColumnType type) {
  switch (type) {
    case ColumnType::kBool:
      return "bool";
    case ColumnType::kInt64:
      return "int64";
    case ColumnType::kFloat64:
      return "float64";
    case ColumnType::kString:
      return "string";
    case ColumnType::kDate:
      return "date";
    case ColumnType::kTimestamp:
      return "timestamp";
  }
  return "?";
}

std::optional<ColumnType> ParseColumnType(std::string_view name) {
  for (ColumnType type : {ColumnType::kBool, ColumnType::kInt64, ColumnType::kFloat64,
                          ColumnType::kString, ColumnType::kDate, ColumnType::kTimestamp}) {
    if (ColumnTypeName(type) == name) return type;
  }
  return std::nullopt;
}

std::optional<ColumnType> TypeOf(const Value& value) {
  switch (value.index()) {
    case 1:
      return ColumnType::kBool;
    case 2:
      return ColumnType::kInt64;
    case 3:
      return ColumnType::kFloat64;
    case 4:
      return ColumnType::kString;
    case 5:
      return ColumnType::kDate;
    case 6:
      return ColumnType::kTimestamp;
    default:
      return std::nullopt;
  }
}

bool ValueMatchesType(const Value& value, ColumnType type) {
  auto actual = TypeOf(value);
  return !actual || *actual == type;
}

namespace {

template <typename T>
std::strong_ordering Order(const T& lhs, const T& rhs) {
  if (lhs < rhs) return std::strong_ordering::less;
  if (rhs < lhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace

std::strong_ordering CompareValues(const Value& lhs, const Value& rhs) {
  switch (lhs.index()) {
    case 1:
      return Order(std::get<bool>(lhs), std::get<bool>(rhs));
    case 2:
      return Order(std::get<std::int64_t>(lhs), std::get<std::int64_t>(rhs));
    case 3:
      return Order(std::get<double>(lhs), std::get<double>(rhs));
    case 4:
      // std::string compares via char_traits<char>, i.e. unsigned bytes.
      return Order(std::get<std::string>(lhs), std::get<std::string>(rhs));
    case 5:
      return std::get<Date>(lhs) <=> std::get<Date>(rhs);
    case 6:
      return std::get<Timestamp>(lhs) <=> std::get<Timestamp>(rhs);
    default:
      return std::strong_ordering::equal;
  }
}

std::int64_t FloorDiv(std::int64_t value, std::int64_t divisor) {
  std::int64_t q = value / divisor;
  if ((value % divisor != 0) && ((value < 0) != (divisor < 0))) --q;
  return q;
}

std::int64_t DaysFromCivil(std::int64_t year, unsigned month, unsigned day) {
  year -= month <= 2;
  const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
  const std::int64_t yoe = year - era * 400;
  const std::int64_t doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

CivilDate CivilFromDays(std::int64_t days) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const std::int64_t doe = days - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  CivilDate out;
  out.day = static_cast<unsigned>(doy - (153 * mp + 2) / 5 + 1);
  out.month = static_cast<unsigned>(mp < 10 ? mp + 3 : mp - 9);
  out.year = yoe + era * 400 + (out.month <= 2);
  return out;
}

namespace {

bool IsLeap(std::int64_t year) {
  return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

unsigned DaysInMonth(std::int64_t year, unsigned month) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return month == 2 && IsLeap(year) ? 29 : kDays[month - 1];
}

std::string FormatYear(std::int64_t year) {
  char buf[32];
  if (year < 0) {
    std::snprintf(buf, sizeof(buf), "-%04lld", static_cast<long long>(-year));
  } else {
    std::snprintf(buf, sizeof(buf), "%04lld", static_cast<long long>(year));
  }
  return buf;
}

// Parses exactly `width` digits at `pos`.
bool ParseDigits(std::string_view text, size_t& pos, size_t width, std::int64_t& out) {
  if (pos + width > text.size()) return false;
  out = 0;
  for (size_t i = 0; i < width; ++i) {
    char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  pos += width;
  return true;
}

bool Expect(std::string_view text, size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) return false;
  ++pos;
  return true;
}

// [-]YYYY[YY]-MM-DD prefix; returns days since epoch.
std::optional<std::int64_t> ParseDatePrefix(std::string_view text, size_t& pos) {
  bool negative = false;
  if (pos < text.size() && text[pos] == '-') {
    negative = true;
    ++pos;
  }
  size_t digits = 0;
  while (pos + digits < text.size() && text[pos + digits] >= '0' && text[pos + digits] <= '9') {
    ++digits;
  }
  if (digits < 4 || digits > 6) return std::nullopt;
  std::int64_t year, month, day;
  if (!ParseDigits(text, pos, digits, year)) return std::nullopt;
  if (negative) year = -year;
  if (!Expect(text, pos, '-') || !ParseDigits(text, pos, 2, month)) return std::nullopt;
  if (!Expect(text, pos, '-') || !ParseDigits(text, pos, 2, day)) return std::nullopt;
  if (month < 1 || month > 12) return std::nullopt;
  if (day < 1 || day > DaysInMonth(year, static_cast<unsigned>(month))) return std::nullopt;
  return DaysFromCivil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

}  // namespace

std::string FormatDate(Date date) {
  CivilDate civil = CivilFromDays(date.days);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "-%02u-%02u", civil.month, civil.day);
  return FormatYear(civil.year) + buf;
}

std::optional<Date> ParseDate(std::string_view text) {
  size_t pos = 0;
  auto days = ParseDatePrefix(text, pos);
  if (!days || pos != text.size()) return std::nullopt;
  if (*days < std::numeric_limits<std::int32_t>::min() ||
      *days > std::numeric_limits<std::int32_t>::max()) {
    return std::nullopt;
  }
  return Date{static_cast<std::int32_t>(*days)};
}

std::string FormatTimestamp(Timestamp ts) {
  const __int128 micros = ts.micros;
  const __int128 day_micros = kMicrosPerDay;
  __int128 days = micros / day_micros;
  if (micros % day_micros != 0 && micros < 0) --days;
  const std::int64_t rem = static_cast<std::int64_t>(micros - days * day_micros);
  CivilDate civil = CivilFromDays(static_cast<std::int64_t>(days));
  const std::int64_t seconds = rem / 1'000'000;
  const std::int64_t fraction = rem % 1'000'000;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ", civil.month,
                civil.day, static_cast<long long>(seconds / 3600),
                static_cast<long long>(seconds / 60 % 60), static_cast<long long>(seconds % 60),
                static_cast<long long>(fraction));
  return FormatYear(civil.year) + buf;
}

std::optional<Timestamp> ParseTimestamp(std::string_view text) {
  size_t pos = 0;
  auto days = ParseDatePrefix(text, pos);
  if (!days || !Expect(text, pos, 'T')) return std::nullopt;
  std::int64_t hour, minute, second, fraction = 0;
  if (!ParseDigits(text, pos, 2, hour) || !Expect(text, pos, ':') ||
      !ParseDigits(text, pos, 2, minute) || !Expect(text, pos, ':') ||
      !ParseDigits(text, pos, 2, second)) {
    return std::nullopt;
  }
  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    size_t width = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (++width > 6) return std::nullopt;
      fraction = fraction * 10 + (text[pos++] - '0');
    }
    if (width == 0) return std::nullopt;
    for (; width < 6; ++width) fraction *= 10;
  }
  if (!Expect(text, pos, 'Z') || pos != text.size()) return std::nullopt;
  const __int128 micros = static_cast<__int128>(*days) * kMicrosPerDay +
                          ((hour * 60 + minute) * 60 + second) * 1'000'000 + fraction;
  if (micros < std::numeric_limits<std::int64_t>::min() ||
      micros > std::numeric_limits<std::int64_t>::max()) {
    return std::nullopt;
  }
  return Timestamp{static_cast<std::int64_t>(micros)};
}

std::string FormatDouble(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string FormatValue(const Value& value) {
  switch (value.index()) {
    case 1:
      return std::get<bool>(value) ? "true" : "false";
    case 2:
      return std::to_string(std::get<std::int64_t>(value));
    case 3:
      return FormatDouble(std::get<double>(value));
    case 4:
      return std::get<std::string>(value);
    case 5:
      return FormatDate(std::get<Date>(value));
    case 6:
      return FormatTimestamp(std::get<Timestamp>(value));
    default:
      return "";
  }
}

std::optional<Value> ParseValue(ColumnType type, std::string_view text) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  switch (type) {
    case ColumnType::kBool:
      if (text == "true") return Value(true);
      if (text == "false") return Value(false);
      return std::nullopt;
    case ColumnType::kInt64: {
      std::int64_t out;
      auto result = std::from_chars(first, last, out);
      if (text.empty() || result.ec != std::errc() || result.ptr != last) return std::nullopt;
      return Value(out);
    }
    case ColumnType::kFloat64: {
      double out;
      auto result = std::from_chars(first, last, out);
      if (text.empty() || result.ec != std::errc() || result.ptr != last ||
          !std::isfinite(out)) {
        return std::nullopt;
      }
      return Value(out == 0.0 ? 0.0 : out);
    }
    case ColumnType::kString:
      if (!IsValidUtf8(text)) return std::nullopt;
      return Value(std::string(text));
    case ColumnType::kDate: {
      auto date = ParseDate(text);
      if (!date) return std::nullopt;
      return Value(*date);
    }
    case ColumnType::kTimestamp: {
      auto ts = ParseTimestamp(text);
      if (!ts) return std::nullopt;
      return Value(*ts);
    }
  }
  return std::nullopt;
}

bool IsValidUtf8(std::string_view text) {
  size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    size_t length;
    std::uint32_t code;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      length = 2;
      code = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      length = 3;
      code = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      length = 4;
      code = c & 0x07;
    } else {
      return false;
    }
    if (i + length > text.size()) return false;
    for (size_t k = 1; k < length; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      code = (code << 6) | (cc & 0x3f);
    }
    static constexpr std::uint32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (code < kMinForLength[length] || code > 0x10ffff ||
        (code >= 0xd800 && code <= 0xdfff)) {
      return false;
    }
    i += length;
  }
  return true;
}

std::string_view Utf8Prefix(std::string_view text, std::int64_t count) {
  size_t i = 0;
  for (std::int64_t n = 0; n < count && i < text.size(); ++n) {
    const auto c = static_cast<unsigned char>(text[i]);
    i += c < 0x80 ? 1 : (c & 0xe0) == 0xc0 ? 2 : (c & 0xf0) == 0xe0 ? 3 : 4;
  }
  return text.substr(0, std::min(i, text.size()));
}

}  // namespace minilake
