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

#include "test_util.h"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "minilake/error.h"

namespace minilake::testing {

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "minilake-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

TestWarehouse::TestWarehouse(CommitOptions options) {
  store = std::make_shared<ObjectStore>(dir.path(), ObjectStore::Options{false});
  catalog = std::make_unique<Catalog>(store, std::move(options));
  catalog->Init();
}

std::vector<Row> ScanRows(const Catalog& catalog, const std::string& table,
                          const std::string& branch, const SnapshotSelector& selector,
                          const std::string& where) {
  return ScanTable(catalog, table, branch, selector, where, {}).rows;
}

std::string RowLine(const Row& row) {
  std::string line;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) line += "|";
    line += IsNull(row[i]) ? "<null>" : FormatValue(row[i]);
  }
  return line;
}

std::vector<std::string> SortedLines(const std::vector<Row>& rows) {
  std::vector<std::string> lines;
  for (const auto& row : rows) lines.push_back(RowLine(row));
  std::sort(lines.begin(), lines.end());
  return lines;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

std::string ReadTestData(const std::string& relative) {
  std::ifstream in(std::string(MINILAKE_TESTDATA_DIR) + "/" + relative, std::ios::binary);
  if (!in) throw std::runtime_error("missing test data " + relative);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<GoldenFixture> GoldenFixtures() {
  std::vector<GoldenFixture> out;
  {
    GoldenFixture f;
    f.file = "golden/mixed.mlf";
    f.schema.schema_id = 0;
    f.schema.fields = {{1, "id", ColumnType::kInt64, true},
                       {2, "name", ColumnType::kString, false},
                       {3, "score", ColumnType::kFloat64, false},
                       {4, "day", ColumnType::kDate, false},
                       {5, "ts", ColumnType::kTimestamp, false},
                       {6, "ok", ColumnType::kBool, false}};
    f.rows = {
        {std::int64_t{1}, std::string("a"), 1.5, Date{19553}, Timestamp{0}, true},
        {std::int64_t{2}, {}, {}, {}, {}, false},
        {std::int64_t{-3}, std::string("bc"), -0.25, Date{0}, Timestamp{1000000}, {}},
    };
    out.push_back(std::move(f));
  }
  {
    GoldenFixture f;
    f.file = "golden/sparse.mlf";
    f.schema.schema_id = 3;
    f.schema.fields = {{1, "id", ColumnType::kInt64, true},
                       {4, "tag", ColumnType::kString, false},
                       {5, "note", ColumnType::kString, false}};
    for (std::int64_t i = 10; i < 19; ++i) {
      Row row{i, {}, {}};
      if (i == 18) row[1] = std::string("h\xc3\xa9llo");
      f.rows.push_back(std::move(row));
    }
    out.push_back(std::move(f));
  }
  {
    GoldenFixture f;
    f.file = "golden/single.mlf";
    f.schema.schema_id = 1;
    f.schema.fields = {{2, "flag", ColumnType::kBool, false}};
    f.rows = {{false}};
    out.push_back(std::move(f));
  }
  return out;
}

std::uint64_t OracleFnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h = (h ^ c) * 0x100000001b3ull;
  }
  return h;
}

std::int64_t OracleDaysFromCivil(int year, int month, int day) {
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  return static_cast<std::int64_t>(timegm(&tm)) / 86400;
}

std::int64_t OracleMicros(int year, int month, int day, int hour, int minute, int second,
                          int micros) {
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  return static_cast<std::int64_t>(timegm(&tm)) * 1000000 + micros;
}

std::vector<ColumnStats> OracleStats(const Schema& schema, const std::vector<Row>& rows) {
  std::vector<ColumnStats> out;
  for (size_t col = 0; col < schema.fields.size(); ++col) {
    ColumnStats stats;
    stats.field_id = schema.fields[col].id;
    std::optional<Value> lo;
    std::optional<Value> hi;
    for (const auto& row : rows) {
      const Value& v = row[col];
      if (IsNull(v)) {
        ++stats.null_count;
        continue;
      }
      if (!lo || v < *lo) lo = v;
      if (!hi || *hi < v) hi = v;
    }
    if (lo) {
      stats.min = FormatValue(*lo);
      stats.max = FormatValue(*hi);
    }
    out.push_back(std::move(stats));
  }
  return out;
}

}  // namespace minilake::testing
