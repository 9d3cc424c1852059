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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/object_store.h"
#include "minilake/schema.h"

namespace minilake {

/// Per-column statistics. min/max are canonical strings (see FormatValue)
/// and are both absent exactly when every value is null.
struct ColumnStats {
  std::int32_t field_id = 0;
  std::optional<std::string> min;
  std::optional<std::string> max;
  std::int64_t null_count = 0;

  bool operator==(const ColumnStats&) const = default;
};

/// A physical data file as tracked by table metadata. The columnar codec
/// fills key, record_count, file_size_bytes and stats; the table layer owns
/// spec_id and partition.
struct DataFile {
  std::string key;
  std::int32_t spec_id = 0;
  std::vector<Value> partition;
  std::int64_t record_count = 0;
  std::int64_t file_size_bytes = 0;
  std::vector<ColumnStats> stats;

  bool operator==(const DataFile&) const = default;
  const ColumnStats* StatsFor(std::int32_t field_id) const;
};

struct FileFooter {
  std::int64_t row_count = 0;
  std::int32_t schema_id = 0;
  std::vector<Field> fields;
  std::vector<ColumnStats> stats;

  bool operator==(const FileFooter&) const = default;
};

struct DecodedFile {
  FileFooter footer;
  std::vector<Row> rows;  // aligned to footer.fields
};

// MLF1 layout, all integers little-endian:
//   "MLF1"
//   per field: null bitmap (ceil(n/8) bytes, bit i set = row i non-null,
//              LSB first), then the non-null values in row order
//   footer: canonical JSON {fields, row_count, schema_id, stats}
//   u32 footer length
//   "MLF1"
inline constexpr std::string_view kMlfMagic = "MLF1";

/// Exact statistics for `rows` under `schema`.
std::vector<ColumnStats> ComputeStats(const Schema& schema, const std::vector<Row>& rows);

/// Pure encoder. Validates every row (kSchemaViolation) and requires at least
/// one row.
std::string EncodeDataFile(const Schema& schema, const std::vector<Row>& rows);
/// Throws kCorruptFile on any structural or statistical inconsistency.
DecodedFile DecodeDataFile(std::string_view bytes);
FileFooter DecodeFooter(std::string_view bytes);

DataFile WriteDataFile(const ObjectStore& store, const Schema& schema,
                       const std::vector<Row>& rows, std::string_view key);

/// Reads rows projected to `projection` (field ids, in that order). Columns
/// are matched by field id; ids missing from the file read as null.
std::vector<Row> ReadDataFile(const ObjectStore& store, std::string_view key,
                              const Schema& read_schema,
                              std::span<const std::int32_t> projection);

FileFooter ReadFooter(const ObjectStore& store, std::string_view key);

}  // namespace minilake
