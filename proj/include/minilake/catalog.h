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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/object_store.h"
#include "minilake/table_metadata.h"

namespace minilake {

/// Retry and fault-injection knobs shared by every path that installs a
/// commit with a ref compare-and-swap.
struct CommitOptions {
  int max_retries = 5;
  /// Full-jitter backoff: sleep uniform(0, min(cap, base * 2^attempt)).
  std::int64_t backoff_base_ms = 2;
  std::int64_t backoff_cap_ms = 100;
  /// Called at named points before the ref swap; throwing from it simulates
  /// a crash at that point.
  std::function<void(std::string_view point)> fault_hook;
};

struct ChangeSummaryEntry {
  std::string table;
  std::string operation;

  bool operator==(const ChangeSummaryEntry&) const = default;
};

/// A content-addressed catalog commit. The hash is the SHA-256 of the
/// canonical encoding of every other field.
struct CatalogCommit {
  std::string hash;
  std::optional<std::string> parent;
  std::int64_t timestamp_ms = 0;
  std::string author;
  std::string message;
  std::map<std::string, std::string> tree;  // table name -> metadata key
  std::vector<ChangeSummaryEntry> change_summary;

  bool operator==(const CatalogCommit&) const = default;

  /// Source head recorded by a merge commit, if any.
  std::optional<std::string> MergedFrom() const;
  bool Touches(std::string_view table) const;
};

inline constexpr std::string_view kMergedFromTrailer = "merged-from: ";

std::string EncodeCommitPayload(const CatalogCommit& commit);
std::string CommitKey(std::string_view hash);

std::string BranchRef(std::string_view branch);
std::string TagRef(std::string_view tag);
bool IsValidRefName(std::string_view name);

class Catalog {
 public:
  Catalog(std::shared_ptr<const ObjectStore> store, CommitOptions options = {});

  const ObjectStore& store() const { return *store_; }
  const CommitOptions& options() const { return options_; }

  /// Stores the empty root commit and points `default_branch` at it.
  void Init(std::string_view default_branch = "main") const;
  bool IsInitialized() const;

  void CreateBranch(std::string_view name, std::string_view from) const;
  void CreateTag(std::string_view name, std::string_view at) const;
  std::vector<std::string> ListRefs() const;
  std::vector<std::string> ListBranches() const;
  std::vector<std::string> ListTags() const;

  /// Throws kUnknownBranch.
  std::string BranchHead(std::string_view branch) const;

  /// Accepts a commit hash, a full ref name, a branch, or a tag.
  CatalogCommit Resolve(std::string_view ref_or_hash) const;
  /// Reads and hash-verifies a commit object (kCorruptCommit on mismatch).
  CatalogCommit LoadCommit(std::string_view hash) const;
  TableMetadata LookupTable(const CatalogCommit& commit, std::string_view table) const;
  std::vector<std::string> ListTables(std::string_view ref_or_hash) const;

  /// Newest first. With a table filter, only commits whose change summary
  /// touches that table.
  std::vector<CatalogCommit> Log(std::string_view branch,
                                 std::optional<std::string_view> table = std::nullopt) const;

  /// Stores the commit (content addressed) and fills in its hash.
  std::string WriteCommit(CatalogCommit& commit) const;
  /// CAS on the branch ref.
  bool AdvanceBranch(std::string_view branch, const std::string& expected,
                     const std::string& next) const;

  /// Parents plus recorded merge sources; `ancestor` == `descendant` counts.
  bool IsAncestor(std::string_view ancestor, std::string_view descendant) const;
  std::optional<std::string> LowestCommonAncestor(std::string_view a, std::string_view b) const;

  /// Merges `source` into `target`. Fast-forwards when possible; otherwise
  /// performs a three-way merge per table against the lowest common ancestor,
  /// replaying source-side data changes onto tables both sides changed.
  /// Throws kMergeConflict listing every table that cannot be merged.
  std::string Merge(std::string_view source, std::string_view target, std::string_view author,
                    std::string_view message) const;

  /// Sleeps for the full-jitter backoff of `attempt`.
  void Backoff(int attempt) const;

 private:
  std::vector<std::string> Predecessors(const CatalogCommit& commit) const;

  std::shared_ptr<const ObjectStore> store_;
  CommitOptions options_;
};

}  // namespace minilake
