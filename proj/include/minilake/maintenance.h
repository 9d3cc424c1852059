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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/catalog.h"

namespace minilake {

struct MaintenanceReport {
  std::string operation;
  std::string commit;  // empty when nothing was committed
  std::int64_t files_before = 0;
  std::int64_t files_after = 0;
  std::int64_t snapshots_removed = 0;
  std::int64_t keys_deleted = 0;
  std::int64_t bytes_reclaimed = 0;

  /// `key=value` lines in a fixed order, for the CLI.
  std::string ToText() const;
};

/// Per partition of the current spec, first-fit bin-packs live files smaller
/// than `target_file_size_bytes` (largest first) and rewrites every bin of two
/// or more files as one file. Commits a REPLACE through the normal commit
/// path. Throws kNothingToCompact when no bin has two files.
MaintenanceReport Compact(const Catalog& catalog, std::string_view table, std::string_view branch,
                          std::int64_t target_file_size_bytes);

/// Groups of live files that Compact would merge, in the order it would
/// write them. Exposed for testing.
std::vector<std::vector<DataFile>> PlanCompaction(const TableMetadata& metadata,
                                                  const std::vector<DataFile>& live,
                                                  std::int64_t target_file_size_bytes);

MaintenanceReport ExpireTableSnapshots(const Catalog& catalog, std::string_view table,
                                       std::string_view branch, std::int64_t older_than_ms,
                                       std::int64_t keep_last);

/// Object keys under the table's location that must be kept: metadata of the
/// table in every commit reachable from any branch or tag, and the manifests
/// and data files of every snapshot in the table's metadata at each ref.
std::set<std::string> ReferencedTableObjects(const Catalog& catalog, std::string_view table);

/// Deletes unreferenced objects under `tables/<table>/`, and commit objects
/// no ref reaches, last modified more than `grace_period_ms` before `now_ms`.
MaintenanceReport RemoveOrphanFiles(const Catalog& catalog, std::string_view table,
                                    std::int64_t grace_period_ms, std::int64_t now_ms);

}  // namespace minilake
