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

#include "minilake/table_change.h"

#include <algorithm>
#include <map>
#include <tuple>

#include "minilake/error.h"

namespace minilake {

std::string_view ChangeKindName(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::kCreate:
      return "CREATE";
    case ChangeKind::kAppend:
      return "APPEND";
    case ChangeKind::kDelete:
      return "DELETE";
    case ChangeKind::kOverwrite:
      return "OVERWRITE";
    case ChangeKind::kReplace:
      return "REPLACE";
    case ChangeKind::kSchema:
      return "SCHEMA";
    case ChangeKind::kSpec:
      return "SPEC";
    case ChangeKind::kRollback:
      return "ROLLBACK";
    case ChangeKind::kExpire:
      return "EXPIRE";
  }
  return "?";
}

bool IsDataChange(ChangeKind kind) {
  return kind == ChangeKind::kAppend || kind == ChangeKind::kDelete ||
         kind == ChangeKind::kOverwrite || kind == ChangeKind::kReplace;
}

TableChange ValidateRebase(const TableChange& change, const RebaseTarget& target) {
  const std::string name(ChangeKindName(change.kind));
  if (change.kind == ChangeKind::kCreate) {
    if (target.table_exists) Throw(ErrorCode::kConflict, "table was created concurrently");
    return change;
  }
  if (!target.table_exists) Throw(ErrorCode::kConflict, name + " on a table that no longer exists");
  switch (change.kind) {
    case ChangeKind::kAppend:
      return change;
    case ChangeKind::kDelete:
    case ChangeKind::kOverwrite:
    case ChangeKind::kReplace:
      for (const auto& key : change.required_live) {
        if (!target.live_keys.count(key)) {
          Throw(ErrorCode::kConflict, name + " rewrites " + key + ", which is no longer live");
        }
      }
      return change;
    default:
      if (!target.metadata_unchanged) {
        Throw(ErrorCode::kConflict, name + " conflicts with a concurrent change to the table");
      }
      return change;
  }
}

TableMetadata ExpireSnapshots(const TableMetadata& metadata, std::int64_t older_than_ms,
                              std::int64_t keep_last) {
  if (keep_last < 1) Throw(ErrorCode::kInvalidArgument, "keep_last must be at least 1");
  std::vector<const Snapshot*> by_recency;
  for (const auto& s : metadata.snapshots) by_recency.push_back(&s);
  std::sort(by_recency.begin(), by_recency.end(), [](const Snapshot* a, const Snapshot* b) {
    return std::tie(a->timestamp_ms, a->snapshot_id) > std::tie(b->timestamp_ms, b->snapshot_id);
  });
  std::set<std::int64_t> keep;
  for (size_t i = 0; i < by_recency.size(); ++i) {
    if (static_cast<std::int64_t>(i) < keep_last || by_recency[i]->timestamp_ms >= older_than_ms) {
      keep.insert(by_recency[i]->snapshot_id);
    }
  }
  if (metadata.current_snapshot_id) keep.insert(*metadata.current_snapshot_id);

  TableMetadata out = metadata;
  std::erase_if(out.snapshots, [&](const Snapshot& s) { return !keep.count(s.snapshot_id); });
  std::erase_if(out.snapshot_log,
                [&](const SnapshotLogEntry& e) { return !keep.count(e.snapshot_id); });
  return out;
}

namespace {

SnapshotOperation OperationFor(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::kDelete:
      return SnapshotOperation::kDelete;
    case ChangeKind::kOverwrite:
      return SnapshotOperation::kOverwrite;
    case ChangeKind::kReplace:
      return SnapshotOperation::kReplace;
    default:
      return SnapshotOperation::kAppend;
  }
}

ChangeKind KindFor(SnapshotOperation op) {
  switch (op) {
    case SnapshotOperation::kDelete:
      return ChangeKind::kDelete;
    case SnapshotOperation::kOverwrite:
      return ChangeKind::kOverwrite;
    case SnapshotOperation::kReplace:
      return ChangeKind::kReplace;
    default:
      return ChangeKind::kAppend;
  }
}

std::int64_t ClampTimestamp(const TableMetadata& metadata, std::int64_t timestamp_ms) {
  if (metadata.snapshot_log.empty()) return timestamp_ms;
  return std::max(timestamp_ms, metadata.snapshot_log.back().timestamp_ms);
}

TableMetadata ApplyDataChange(const ObjectStore& store, const TableMetadata& base,
                              const TableChange& change, std::int64_t timestamp_ms) {
  TableMetadata out = base;
  const Snapshot* parent = base.CurrentSnapshot();
  std::vector<std::string> manifests;
  if (parent) manifests = parent->manifest_keys;

  std::vector<ManifestEntry> entries;
  if (manifests.size() + 1 > kMaxManifestsPerSnapshot) {
    // Fold the parent's manifests into one listing of every surviving file.
    std::set<std::string> removed;
    for (const auto& f : change.removed_files) removed.insert(f.key);
    size_t found = 0;
    for (auto& file : LiveFiles(store, base, parent->snapshot_id)) {
      if (removed.count(file.key)) {
        ++found;
        continue;
      }
      entries.push_back({EntryStatus::kExisting, std::move(file)});
    }
    if (found != removed.size()) {
      Throw(ErrorCode::kConflict, "a replaced file is not live in the parent snapshot");
    }
    manifests.clear();
  }
  Snapshot snapshot;
  snapshot.snapshot_id = base.last_snapshot_id + 1;
  snapshot.parent_id = base.current_snapshot_id;
  snapshot.timestamp_ms = ClampTimestamp(base, timestamp_ms);
  snapshot.operation = OperationFor(change.kind);
  for (const auto& file : change.added_files) {
    entries.push_back({EntryStatus::kAdded, file});
    snapshot.summary.added_files += 1;
    snapshot.summary.added_rows += file.record_count;
  }
  for (const auto& file : change.removed_files) {
    entries.push_back({EntryStatus::kDeleted, file});
    snapshot.summary.deleted_files += 1;
    snapshot.summary.deleted_rows += file.record_count;
  }
  manifests.push_back(WriteManifest(store, out, entries));
  snapshot.manifest_keys = std::move(manifests);

  out.last_snapshot_id = snapshot.snapshot_id;
  out.current_snapshot_id = snapshot.snapshot_id;
  out.snapshot_log.push_back({snapshot.snapshot_id, snapshot.timestamp_ms});
  out.snapshots.push_back(std::move(snapshot));
  return out;
}

}  // namespace

TableMetadata ApplyChange(const ObjectStore& store, const std::optional<TableMetadata>& base,
                          const TableChange& change, std::int64_t timestamp_ms) {
  if (change.kind == ChangeKind::kCreate) {
    if (!change.created) Throw(ErrorCode::kInvalidArgument, "CREATE without metadata");
    return *change.created;
  }
  if (!base) Throw(ErrorCode::kUnknownTable, "table does not exist");
  switch (change.kind) {
    case ChangeKind::kSchema:
      return EvolveSchema(*base, change.schema_changes);
    case ChangeKind::kSpec:
      return EvolvePartitionSpec(*base, change.spec_fields);
    case ChangeKind::kExpire:
      return ExpireSnapshots(*base, change.expire_older_than_ms, change.expire_keep_last);
    case ChangeKind::kRollback: {
      if (!base->SnapshotById(change.rollback_to)) {
        Throw(ErrorCode::kUnknownSnapshot, "unknown snapshot " + std::to_string(change.rollback_to));
      }
      TableMetadata out = *base;
      out.current_snapshot_id = change.rollback_to;
      out.snapshot_log.push_back({change.rollback_to, ClampTimestamp(*base, timestamp_ms)});
      return out;
    }
    default:
      return ApplyDataChange(store, *base, change, timestamp_ms);
  }
}

std::vector<TableChange> ChangesSince(const ObjectStore& store, const TableMetadata& base,
                                      const TableMetadata& source) {
  if (source.table_uuid != base.table_uuid) {
    Throw(ErrorCode::kConflict, "table was recreated");
  }
  if (source.schemas != base.schemas || source.current_schema_id != base.current_schema_id) {
    Throw(ErrorCode::kConflict, "schema changed");
  }
  if (source.partition_specs != base.partition_specs ||
      source.current_spec_id != base.current_spec_id) {
    Throw(ErrorCode::kConflict, "partition spec changed");
  }
  for (const auto& snapshot : base.snapshots) {
    if (!source.SnapshotById(snapshot.snapshot_id)) {
      Throw(ErrorCode::kConflict, "snapshots were expired");
    }
  }
  if (source.snapshot_log.size() < base.snapshot_log.size() ||
      !std::equal(base.snapshot_log.begin(), base.snapshot_log.end(),
                  source.snapshot_log.begin())) {
    Throw(ErrorCode::kConflict, "snapshot history diverged");
  }

  std::vector<const Snapshot*> chain;
  for (auto id = source.current_snapshot_id; id != base.current_snapshot_id;) {
    const Snapshot* snapshot = id ? source.SnapshotById(*id) : nullptr;
    if (!snapshot || snapshot->snapshot_id <= base.last_snapshot_id) {
      Throw(ErrorCode::kConflict, "table was rolled back");
    }
    chain.push_back(snapshot);
    id = snapshot->parent_id;
  }
  std::reverse(chain.begin(), chain.end());
  if (source.snapshot_log.size() - base.snapshot_log.size() != chain.size()) {
    Throw(ErrorCode::kConflict, "table was rolled back");
  }
  for (size_t i = 0; i < chain.size(); ++i) {
    if (source.snapshot_log[base.snapshot_log.size() + i].snapshot_id != chain[i]->snapshot_id) {
      Throw(ErrorCode::kConflict, "table was rolled back");
    }
  }

  std::map<std::string, DataFile> previous;
  if (base.current_snapshot_id) {
    for (auto& f : LiveFiles(store, base, *base.current_snapshot_id)) {
      previous.emplace(f.key, std::move(f));
    }
  }
  std::vector<TableChange> changes;
  for (const Snapshot* snapshot : chain) {
    std::map<std::string, DataFile> current;
    for (auto& f : LiveFiles(store, source, snapshot->snapshot_id)) {
      current.emplace(f.key, std::move(f));
    }
    TableChange change;
    change.kind = KindFor(snapshot->operation);
    for (const auto& [key, file] : current) {
      if (!previous.count(key)) change.added_files.push_back(file);
    }
    for (const auto& [key, file] : previous) {
      if (!current.count(key)) {
        change.removed_files.push_back(file);
        change.required_live.insert(key);
      }
    }
    changes.push_back(std::move(change));
    previous = std::move(current);
  }
  return changes;
}

}  // namespace minilake
