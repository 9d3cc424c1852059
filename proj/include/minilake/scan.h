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
#include <string>
#include <string_view>
#include <vector>

#include "minilake/catalog.h"
#include "minilake/predicate.h"
#include "minilake/table_metadata.h"

namespace minilake {

struct SnapshotSelector {
  enum class Kind { kHead, kAtSnapshot, kAsOf, kAtCommit };

  Kind kind = Kind::kHead;
  std::int64_t snapshot_id = 0;
  std::int64_t timestamp_ms = 0;
  std::string commit;

  static SnapshotSelector Head() { return {}; }
  static SnapshotSelector AtSnapshot(std::int64_t id) { return {Kind::kAtSnapshot, id, 0, {}}; }
  static SnapshotSelector AsOf(std::int64_t ms) { return {Kind::kAsOf, 0, ms, {}}; }
  static SnapshotSelector AtCommit(std::string hash) {
    return {Kind::kAtCommit, 0, 0, std::move(hash)};
  }
};

/// Metadata to read with, and the snapshot to read (absent: table has no
/// data yet, so every scan is empty).
struct ResolvedSnapshot {
  TableMetadata metadata;
  std::optional<std::int64_t> snapshot_id;
};

/// Throws kUnknownTable, kUnknownSnapshot, kNoSnapshotAsOf, kUnknownBranch,
/// kUnknownRef.
ResolvedSnapshot ResolveSnapshot(const Catalog& catalog, std::string_view table,
                                 const SnapshotSelector& selector, std::string_view branch);

struct ScanTask {
  DataFile data_file;
  Schema read_schema;
  std::vector<std::int32_t> projection;  // field ids
};

struct ScanPlan {
  std::vector<ScanTask> tasks;
  /// Files live in the snapshot before pruning.
  std::int64_t live_file_count = 0;
};

/// False only when `file` provably holds no row satisfying `predicate`.
/// Partition values are consulted only for atoms on source columns of the
/// file's own spec; statistics are consulted for every atom.
bool FileMayMatch(const TableMetadata& metadata, const DataFile& file, const Predicate& predicate);

/// Field ids for column names in the current schema; empty `columns` means
/// all columns. Throws kUnknownColumn.
std::vector<std::int32_t> ResolveProjection(const Schema& schema,
                                            const std::vector<std::string>& columns);

ScanPlan PlanScan(const ObjectStore& store, const TableMetadata& metadata,
                  std::optional<std::int64_t> snapshot_id, const Predicate& predicate,
                  const std::vector<std::int32_t>& projection);

/// Rows in task order, then file order, projected to each task's projection.
std::vector<Row> ExecuteScan(const ObjectStore& store, const std::vector<ScanTask>& tasks,
                             const Predicate& predicate);

/// Result of a complete scan, with the column names of the projection.
struct ScanResult {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::int64_t files_scanned = 0;
  std::int64_t files_pruned = 0;
};

/// Resolve, parse, plan and execute in one call.
ScanResult ScanTable(const Catalog& catalog, std::string_view table, std::string_view branch,
                     const SnapshotSelector& selector, std::string_view where,
                     const std::vector<std::string>& columns);

/// Distinct non-null `fact.fk` values with no equal `dim.key`, sorted.
std::vector<Value> CheckReferentialIntegrity(const Catalog& catalog, std::string_view fact,
                                             std::string_view fk, std::string_view dim,
                                             std::string_view key, std::string_view branch);

}  // namespace minilake
