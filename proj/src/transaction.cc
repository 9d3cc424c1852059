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

#include "minilake/transaction.h"

#include <algorithm>

#include "minilake/error.h"
#include "minilake/scan.h"
#include "util.h"

namespace minilake {

namespace {

std::string DataFileKey(const TableMetadata& metadata) {
  return metadata.location + "/data/" + RandomToken() + ".mlf";
}

}  // namespace

Transaction::Transaction(const Catalog& catalog, std::string branch)
    : catalog_(catalog), branch_(std::move(branch)) {
  base_commit_ = catalog_.BranchHead(branch_);
  base_ = catalog_.LoadCommit(base_commit_);
}

bool Transaction::HasStagedChanges() const {
  return std::any_of(staged_.begin(), staged_.end(),
                     [](const auto& entry) { return !entry.second.changes.empty(); });
}

void Transaction::RequireOpen() const {
  if (state_ != State::kOpen) Throw(ErrorCode::kTransactionClosed, "transaction is closed");
}

void Transaction::Fault(std::string_view point) const {
  if (catalog_.options().fault_hook) catalog_.options().fault_hook(point);
}

Transaction::StagedTable& Transaction::Stage(std::string_view table) const {
  auto it = staged_.find(table);
  if (it != staged_.end()) {
    if (it->second.changes.empty() && !it->second.base_key) {
      Throw(ErrorCode::kUnknownTable, "unknown table '" + std::string(table) + "'");
    }
    return it->second;
  }
  StagedTable staged;
  const auto key = base_.tree.find(std::string(table));
  if (key == base_.tree.end()) {
    Throw(ErrorCode::kUnknownTable, "unknown table '" + std::string(table) + "'");
  }
  staged.base_key = key->second;
  staged.view = LoadMetadata(catalog_.store(), key->second);
  for (auto& f : CurrentLiveFiles(catalog_.store(), staged.view)) {
    staged.live.emplace(f.key, std::move(f));
  }
  return staged_.emplace(std::string(table), std::move(staged)).first->second;
}

const TableMetadata& Transaction::Metadata(std::string_view table) const {
  return Stage(table).view;
}

std::vector<DataFile> Transaction::LiveFiles(std::string_view table) const {
  std::vector<DataFile> out;
  for (const auto& [key, file] : Stage(table).live) out.push_back(file);
  return out;
}

void Transaction::CreateTable(std::string_view table, Schema schema,
                              const std::vector<PartitionFieldDef>& partition) {
  RequireOpen();
  if (!IsIdentifier(table)) {
    Throw(ErrorCode::kInvalidArgument, "invalid table name '" + std::string(table) + "'");
  }
  if (base_.tree.count(std::string(table)) || staged_.count(table)) {
    Throw(ErrorCode::kTableExists, "table '" + std::string(table) + "' already exists");
  }
  StagedTable staged;
  staged.view = NewTableMetadata(table, std::move(schema), partition);
  TableChange change;
  change.kind = ChangeKind::kCreate;
  change.created = staged.view;
  staged.changes.push_back(std::move(change));
  staged_.emplace(std::string(table), std::move(staged));
}

std::vector<DataFile> Transaction::WriteRows(std::string_view table,
                                             const std::vector<Row>& rows) const {
  const StagedTable& staged = Stage(table);
  const Schema& schema = staged.view.CurrentSchema();
  const PartitionSpec& spec = staged.view.CurrentSpec();
  for (const auto& row : rows) ValidateRow(schema, row);

  // Group by partition tuple, keeping first-seen order of groups.
  std::vector<std::pair<std::vector<Value>, std::vector<Row>>> groups;
  std::map<std::string, size_t> group_index;
  for (const auto& row : rows) {
    std::vector<Value> tuple = PartitionTuple(spec, schema, row);
    auto [it, inserted] = group_index.emplace(PartitionSignature(tuple), groups.size());
    if (inserted) groups.emplace_back(std::move(tuple), std::vector<Row>{});
    groups[it->second].second.push_back(row);
  }
  std::vector<DataFile> files;
  for (auto& [tuple, group] : groups) {
    DataFile file = WriteDataFile(catalog_.store(), schema, group, DataFileKey(staged.view));
    file.spec_id = spec.spec_id;
    file.partition = std::move(tuple);
    files.push_back(std::move(file));
  }
  return files;
}

std::set<std::string> Transaction::RequiredLive(const StagedTable& staged,
                                                const std::vector<DataFile>& removed) const {
  (void)staged;
  std::set<std::string> keys;
  for (const auto& f : removed) {
    if (!created_in_tx_.count(f.key)) keys.insert(f.key);
  }
  return keys;
}

void Transaction::StageDataChange(StagedTable& staged, TableChange change) {
  for (const auto& f : change.removed_files) {
    if (!staged.live.erase(f.key)) {
      Throw(ErrorCode::kConflict, "file " + f.key + " is not live");
    }
  }
  for (const auto& f : change.added_files) {
    created_in_tx_.insert(f.key);
    staged.live.emplace(f.key, f);
  }
  change.required_live = RequiredLive(staged, change.removed_files);
  staged.changes.push_back(std::move(change));
}

void Transaction::Append(std::string_view table, const std::vector<Row>& rows) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  if (rows.empty()) return;
  TableChange change;
  change.kind = ChangeKind::kAppend;
  change.added_files = WriteRows(table, rows);
  Fault("stage_data_written");
  StageDataChange(staged, std::move(change));
}

std::int64_t Transaction::Rewrite(std::string_view table, ChangeKind kind,
                                  const Predicate& candidates, const RowMapper& mapper,
                                  const std::vector<Row>& new_rows) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  const Schema& schema = staged.view.CurrentSchema();
  const auto all_columns = ResolveProjection(schema, {});
  for (const auto& row : new_rows) ValidateRow(schema, row);

  std::int64_t touched = 0;
  std::vector<DataFile> removed;
  std::vector<Row> kept;
  for (const auto& [key, file] : staged.live) {
    if (!FileMayMatch(staged.view, file, candidates)) continue;
    std::vector<Row> rows = ReadDataFile(catalog_.store(), key, schema, all_columns);
    std::vector<Row> survivors;
    std::int64_t file_touched = 0;
    for (auto& row : rows) {
      std::optional<Row> mapped = mapper(row);
      if (!mapped) {
        ++file_touched;
        continue;
      }
      if (*mapped != row) {
        ValidateRow(schema, *mapped);
        ++file_touched;
      }
      survivors.push_back(std::move(*mapped));
    }
    if (file_touched == 0) continue;
    touched += file_touched;
    removed.push_back(file);
    for (auto& row : survivors) kept.push_back(std::move(row));
  }
  if (removed.empty() && new_rows.empty()) return 0;

  for (const auto& row : new_rows) kept.push_back(row);
  TableChange change;
  change.kind = kind;
  change.removed_files = std::move(removed);
  if (!kept.empty()) change.added_files = WriteRows(table, kept);
  Fault("stage_data_written");
  StageDataChange(staged, std::move(change));
  return touched;
}

std::int64_t Transaction::Delete(std::string_view table, const Predicate& predicate) {
  return Rewrite(
      table, ChangeKind::kDelete, predicate,
      [&, schema = Stage(table).view.CurrentSchema()](const Row& row) -> std::optional<Row> {
        if (EvaluatePredicate(predicate, schema, row)) return std::nullopt;
        return row;
      },
      {});
}

std::int64_t Transaction::Delete(std::string_view table, std::string_view where) {
  return Delete(table, ParsePredicate(where, Stage(table).view.CurrentSchema()));
}

std::int64_t Transaction::Overwrite(std::string_view table, const Predicate& predicate,
                                    const std::vector<Row>& rows) {
  return Rewrite(
      table, ChangeKind::kOverwrite, predicate,
      [&, schema = Stage(table).view.CurrentSchema()](const Row& row) -> std::optional<Row> {
        if (EvaluatePredicate(predicate, schema, row)) return std::nullopt;
        return row;
      },
      rows);
}

void Transaction::Replace(std::string_view table, const std::vector<DataFile>& removed,
                          const std::vector<DataFile>& added) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  TableChange change;
  change.kind = ChangeKind::kReplace;
  change.removed_files = removed;
  change.added_files = added;
  StageDataChange(staged, std::move(change));
}

void Transaction::ChangeSchema(std::string_view table, const std::vector<SchemaChange>& changes) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  staged.view = EvolveSchema(staged.view, changes);
  TableChange change;
  change.kind = ChangeKind::kSchema;
  change.schema_changes = changes;
  staged.changes.push_back(std::move(change));
}

void Transaction::ChangePartitionSpec(std::string_view table,
                                      const std::vector<PartitionFieldDef>& fields) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  staged.view = EvolvePartitionSpec(staged.view, fields);
  TableChange change;
  change.kind = ChangeKind::kSpec;
  change.spec_fields = fields;
  staged.changes.push_back(std::move(change));
}

void Transaction::Rollback(std::string_view table, std::int64_t snapshot_id) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  if (!staged.view.SnapshotById(snapshot_id)) {
    Throw(ErrorCode::kUnknownSnapshot,
          "table " + std::string(table) + " has no snapshot " + std::to_string(snapshot_id));
  }
  staged.view.current_snapshot_id = snapshot_id;
  staged.live.clear();
  for (auto& f : minilake::LiveFiles(catalog_.store(), staged.view, snapshot_id)) {
    staged.live.emplace(f.key, std::move(f));
  }
  TableChange change;
  change.kind = ChangeKind::kRollback;
  change.rollback_to = snapshot_id;
  staged.changes.push_back(std::move(change));
}

void Transaction::ExpireSnapshots(std::string_view table, std::int64_t older_than_ms,
                                  std::int64_t keep_last) {
  RequireOpen();
  StagedTable& staged = Stage(table);
  staged.view = minilake::ExpireSnapshots(staged.view, older_than_ms, keep_last);
  TableChange change;
  change.kind = ChangeKind::kExpire;
  change.expire_older_than_ms = older_than_ms;
  change.expire_keep_last = keep_last;
  staged.changes.push_back(std::move(change));
}

void Transaction::Abort() {
  RequireOpen();
  state_ = State::kAborted;
}

std::string Transaction::Commit(std::string_view author, std::string_view message) {
  RequireOpen();
  if (!HasStagedChanges()) Throw(ErrorCode::kInvalidArgument, "nothing staged");
  const ObjectStore& store = catalog_.store();
  const CommitOptions& options = catalog_.options();
  try {
    Fault("commit_begin");
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      if (attempt > 0) catalog_.Backoff(attempt);
      const std::string head_hash = catalog_.BranchHead(branch_);
      const CatalogCommit head =
          head_hash == base_commit_ ? base_ : catalog_.LoadCommit(head_hash);

      CatalogCommit commit;
      commit.parent = head_hash;
      commit.timestamp_ms = std::max(NowMs(), head.timestamp_ms);
      commit.author = std::string(author);
      commit.message = std::string(message);
      commit.tree = head.tree;

      for (const auto& [name, staged] : staged_) {
        if (staged.changes.empty()) continue;
        const auto head_key = head.tree.find(name);
        std::optional<TableMetadata> metadata;
        if (head_key != head.tree.end()) metadata = LoadMetadata(store, head_key->second);

        if (head_hash != base_commit_) {
          RebaseTarget target;
          target.table_exists = metadata.has_value();
          target.metadata_unchanged =
              metadata && staged.base_key && head_key->second == *staged.base_key;
          if (metadata) {
            for (const auto& f : CurrentLiveFiles(store, *metadata)) target.live_keys.insert(f.key);
          }
          if (staged.changes.front().kind == ChangeKind::kCreate) {
            ValidateRebase(staged.changes.front(), target);
          } else {
            for (const auto& change : staged.changes) ValidateRebase(change, target);
          }
        }
        for (const auto& change : staged.changes) {
          metadata = ApplyChange(store, metadata, change, commit.timestamp_ms);
          commit.change_summary.push_back({name, std::string(ChangeKindName(change.kind))});
        }
        Fault("manifest_written");
        commit.tree[name] = StoreMetadata(store, *metadata);
        Fault("metadata_written");
      }

      catalog_.WriteCommit(commit);
      Fault("commit_object_written");
      Fault("before_cas");
      if (catalog_.AdvanceBranch(branch_, head_hash, commit.hash)) {
        state_ = State::kCommitted;
        return commit.hash;
      }
    }
  } catch (...) {
    state_ = State::kAborted;
    throw;
  }
  state_ = State::kAborted;
  Throw(ErrorCode::kRetriesExhausted,
        "lost the race for " + branch_ + " " + std::to_string(options.max_retries + 1) + " times");
}

}  // namespace minilake
