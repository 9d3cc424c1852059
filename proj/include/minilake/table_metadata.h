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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/columnar_file.h"
#include "minilake/object_store.h"
#include "minilake/schema.h"
#include "minilake/transform.h"

namespace minilake {

enum class SnapshotOperation { kAppend, kDelete, kOverwrite, kReplace, kRollback };

std::string_view SnapshotOperationName(SnapshotOperation op);

struct SnapshotSummary {
  std::int64_t added_files = 0;
  std::int64_t deleted_files = 0;
  std::int64_t added_rows = 0;
  std::int64_t deleted_rows = 0;

  bool operator==(const SnapshotSummary&) const = default;
};

struct Snapshot {
  std::int64_t snapshot_id = 0;
  std::optional<std::int64_t> parent_id;
  std::int64_t timestamp_ms = 0;
  SnapshotOperation operation = SnapshotOperation::kAppend;
  std::vector<std::string> manifest_keys;
  SnapshotSummary summary;

  bool operator==(const Snapshot&) const = default;
};

enum class EntryStatus { kAdded, kExisting, kDeleted };

struct ManifestEntry {
  EntryStatus status = EntryStatus::kAdded;
  DataFile data_file;

  bool operator==(const ManifestEntry&) const = default;
};

struct SnapshotLogEntry {
  std::int64_t snapshot_id = 0;
  std::int64_t timestamp_ms = 0;

  bool operator==(const SnapshotLogEntry&) const = default;
};

/// Root of a table's metadata tree. Immutable once stored; every change
/// produces a new object.
struct TableMetadata {
  std::string table_uuid;
  std::int32_t format_version = 1;
  std::string location;
  std::int32_t last_column_id = 0;
  std::vector<Schema> schemas;
  std::int32_t current_schema_id = 0;
  std::vector<PartitionSpec> partition_specs;
  std::int32_t current_spec_id = 0;
  /// Highest snapshot id ever issued; ids are never reused, even after
  /// expiration.
  std::int64_t last_snapshot_id = 0;
  std::vector<Snapshot> snapshots;
  std::optional<std::int64_t> current_snapshot_id;
  std::vector<SnapshotLogEntry> snapshot_log;
  std::map<std::string, std::string> properties;

  bool operator==(const TableMetadata&) const = default;

  const Schema& CurrentSchema() const;
  const PartitionSpec& CurrentSpec() const;
  const Schema* SchemaById(std::int32_t id) const;
  const PartitionSpec* SpecById(std::int32_t id) const;
  const Snapshot* SnapshotById(std::int64_t id) const;
  const Snapshot* CurrentSnapshot() const;
  /// The newest definition of a field id across all schemas, including
  /// dropped fields.
  const Field* FieldInHistory(std::int32_t field_id) const;
};

struct SchemaChange {
  enum class Kind { kAdd, kDrop, kRename };

  Kind kind = Kind::kAdd;
  std::string name;  // column to add, drop, or rename
  ColumnType type = ColumnType::kString;
  std::string new_name;

  bool operator==(const SchemaChange&) const = default;

  static SchemaChange Add(std::string name, ColumnType type) {
    return {Kind::kAdd, std::move(name), type, {}};
  }
  static SchemaChange Drop(std::string name) {
    return {Kind::kDrop, std::move(name), ColumnType::kString, {}};
  }
  static SchemaChange Rename(std::string from, std::string to) {
    return {Kind::kRename, std::move(from), ColumnType::kString, std::move(to)};
  }
};

/// Fresh metadata for a new table at `tables/<name>`; schema 0 and spec 0.
/// Field ids in `schema` are kept as given.
TableMetadata NewTableMetadata(std::string_view name, Schema schema,
                               const std::vector<PartitionFieldDef>& partition);

/// Appends a new schema and makes it current. Never touches data files.
TableMetadata EvolveSchema(const TableMetadata& metadata,
                           const std::vector<SchemaChange>& changes);

/// Appends a new partition spec and makes it current. Existing files keep
/// their spec ids.
TableMetadata EvolvePartitionSpec(const TableMetadata& metadata,
                                  const std::vector<PartitionFieldDef>& fields);

/// Writes a manifest under `<location>/metadata/` and returns its key.
std::string WriteManifest(const ObjectStore& store, const TableMetadata& metadata,
                          const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> ReadManifest(const ObjectStore& store, const TableMetadata& metadata,
                                        std::string_view key);

/// Files live in `snapshot_id`, sorted by key. Throws kUnknownSnapshot.
std::vector<DataFile> LiveFiles(const ObjectStore& store, const TableMetadata& metadata,
                                std::int64_t snapshot_id);
/// Live files of the current snapshot; empty when the table has no data.
std::vector<DataFile> CurrentLiveFiles(const ObjectStore& store, const TableMetadata& metadata);

/// Throws kCorruptMetadata when a structural invariant does not hold.
void ValidateMetadata(const TableMetadata& metadata);

std::string EncodeMetadata(const TableMetadata& metadata);
TableMetadata DecodeMetadata(std::string_view text);

/// Stores at a fresh key under `<location>/metadata/`.
std::string StoreMetadata(const ObjectStore& store, const TableMetadata& metadata);
TableMetadata LoadMetadata(const ObjectStore& store, std::string_view key);

}  // namespace minilake
