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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/table_metadata.h"

namespace minilake {

enum class ChangeKind {
  kCreate,
  kAppend,
  kDelete,
  kOverwrite,
  kReplace,
  kSchema,
  kSpec,
  kRollback,
  kExpire,
};

std::string_view ChangeKindName(ChangeKind kind);

/// APPEND/DELETE/OVERWRITE/REPLACE: changes that produce a new snapshot.
bool IsDataChange(ChangeKind kind);

/// One staged operation on one table. Data files it adds are already in the
/// object store; applying the change only writes metadata.
struct TableChange {
  ChangeKind kind = ChangeKind::kAppend;
  std::vector<DataFile> added_files;
  std::vector<DataFile> removed_files;
  /// Files that must still be live when the change is rebased.
  std::set<std::string> required_live;

  std::vector<SchemaChange> schema_changes;       // kSchema
  std::vector<PartitionFieldDef> spec_fields;     // kSpec
  std::int64_t rollback_to = 0;                   // kRollback
  std::int64_t expire_older_than_ms = 0;          // kExpire
  std::int64_t expire_keep_last = 1;              // kExpire
  std::optional<TableMetadata> created;           // kCreate
};

/// What the latest head looks like for one table, relative to the head a
/// change was staged against.
struct RebaseTarget {
  bool table_exists = false;
  /// True when the table's metadata object key is the same in both heads.
  bool metadata_unchanged = false;
  std::set<std::string> live_keys;
};

/// Conflict rules for replaying `change` on a newer head:
///   APPEND always rebases; DELETE/OVERWRITE/REPLACE rebase iff every
///   required_live key is still live; SCHEMA/SPEC/ROLLBACK/EXPIRE rebase iff
///   the table's metadata is unchanged; CREATE rebases iff the table still
///   does not exist. Throws kConflict otherwise.
TableChange ValidateRebase(const TableChange& change, const RebaseTarget& target);

/// Keeps only snapshots that are current, among the `keep_last` most recent,
/// or not older than `older_than_ms`. Trims the snapshot log to match.
TableMetadata ExpireSnapshots(const TableMetadata& metadata, std::int64_t older_than_ms,
                              std::int64_t keep_last);

/// Upper bound on manifests per snapshot before they are merged into one.
inline constexpr size_t kMaxManifestsPerSnapshot = 16;

/// Produces the metadata that results from `change`, writing any manifests
/// it needs. `base` is absent only for kCreate. Snapshot timestamps are
/// clamped so the snapshot log stays chronological.
TableMetadata ApplyChange(const ObjectStore& store, const std::optional<TableMetadata>& base,
                          const TableChange& change, std::int64_t timestamp_ms);

/// Reconstructs the data changes `source` made on top of `base` as a list of
/// replayable changes, oldest first. Throws kConflict when `source` also
/// changed schema, spec, snapshot retention, or rolled back, since those
/// cannot be replayed onto a diverged table.
std::vector<TableChange> ChangesSince(const ObjectStore& store, const TableMetadata& base,
                                      const TableMetadata& source);

}  // namespace minilake
