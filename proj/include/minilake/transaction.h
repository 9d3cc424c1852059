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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/catalog.h"
#include "minilake/predicate.h"
#include "minilake/table_change.h"
#include "minilake/table_metadata.h"

namespace minilake {

/// A multi-table unit of work pinned to one branch head.
///
/// Staging writes data files immediately and records a TableChange per
/// operation; nothing becomes visible until Commit installs one catalog
/// commit with a single ref compare-and-swap. Confined to one thread.
class Transaction {
 public:
  enum class State { kOpen, kCommitted, kAborted };

  /// Maps an existing row to its replacement; nullopt drops it.
  using RowMapper = std::function<std::optional<Row>(const Row&)>;

  /// Throws kUnknownBranch.
  Transaction(const Catalog& catalog, std::string branch);

  const std::string& branch() const { return branch_; }
  const std::string& base_commit() const { return base_commit_; }
  State state() const { return state_; }
  bool HasStagedChanges() const;

  /// The table as this transaction sees it, staged changes included.
  const TableMetadata& Metadata(std::string_view table) const;
  std::vector<DataFile> LiveFiles(std::string_view table) const;

  void CreateTable(std::string_view table, Schema schema,
                   const std::vector<PartitionFieldDef>& partition);
  void Append(std::string_view table, const std::vector<Row>& rows);
  /// Copy-on-write delete; returns the number of rows removed.
  std::int64_t Delete(std::string_view table, const Predicate& predicate);
  std::int64_t Delete(std::string_view table, std::string_view where);
  /// Removes rows matching `predicate` and adds `rows`, as one change.
  std::int64_t Overwrite(std::string_view table, const Predicate& predicate,
                         const std::vector<Row>& rows);
  /// Applies `mapper` to every row of every live file `candidates` may match,
  /// rewriting files in which any row changed, then adds `new_rows`. Stages
  /// a change of `kind` (kDelete or kOverwrite) unless nothing changed.
  /// Returns the number of existing rows the mapper dropped or changed.
  std::int64_t Rewrite(std::string_view table, ChangeKind kind, const Predicate& candidates,
                       const RowMapper& mapper, const std::vector<Row>& new_rows);
  /// Swaps `removed` for `added` without changing table content.
  void Replace(std::string_view table, const std::vector<DataFile>& removed,
               const std::vector<DataFile>& added);
  void ChangeSchema(std::string_view table, const std::vector<SchemaChange>& changes);
  void ChangePartitionSpec(std::string_view table, const std::vector<PartitionFieldDef>& fields);
  void Rollback(std::string_view table, std::int64_t snapshot_id);
  void ExpireSnapshots(std::string_view table, std::int64_t older_than_ms,
                       std::int64_t keep_last);

  /// Writes rows under the table's current schema and spec, one file per
  /// partition tuple, without staging anything.
  std::vector<DataFile> WriteRows(std::string_view table, const std::vector<Row>& rows) const;

  /// Installs every staged change atomically. On a lost race, validates each
  /// change against the new head and retries. Throws kConflict,
  /// kRetriesExhausted, kTransactionClosed, kInvalidArgument (nothing staged).
  std::string Commit(std::string_view author, std::string_view message);
  void Abort();

 private:
  struct StagedTable {
    std::optional<std::string> base_key;  // metadata key in the base commit
    TableMetadata view;
    std::map<std::string, DataFile> live;
    std::vector<TableChange> changes;
  };

  void RequireOpen() const;
  void Fault(std::string_view point) const;
  /// Loads the table's base state on first use. Throws kUnknownTable.
  StagedTable& Stage(std::string_view table) const;
  /// required_live for files removed by a change: those not created in this
  /// transaction.
  std::set<std::string> RequiredLive(const StagedTable& staged,
                                     const std::vector<DataFile>& removed) const;
  void StageDataChange(StagedTable& staged, TableChange change);

  const Catalog& catalog_;
  std::string branch_;
  std::string base_commit_;
  CatalogCommit base_;
  State state_ = State::kOpen;
  // Tables loaded so far; entries without changes are read-only views.
  mutable std::map<std::string, StagedTable, std::less<>> staged_;
  std::set<std::string> created_in_tx_;
};

}  // namespace minilake
