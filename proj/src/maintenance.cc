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

#include "minilake/maintenance.h"

#include <algorithm>
#include <deque>
#include <map>

#include "minilake/error.h"
#include "minilake/scan.h"
#include "minilake/transaction.h"

namespace minilake {

std::string MaintenanceReport::ToText() const {
  std::string out = "operation=" + operation + "\n";
  if (!commit.empty()) out += "commit=" + commit + "\n";
  if (operation == "compact") {
    out += "files_before=" + std::to_string(files_before) + "\n";
    out += "files_after=" + std::to_string(files_after) + "\n";
  } else if (operation == "expire_snapshots") {
    out += "snapshots_removed=" + std::to_string(snapshots_removed) + "\n";
  } else {
    out += "keys_deleted=" + std::to_string(keys_deleted) + "\n";
  }
  out += "bytes_reclaimed=" + std::to_string(bytes_reclaimed) + "\n";
  return out;
}

std::vector<std::vector<DataFile>> PlanCompaction(const TableMetadata& metadata,
                                                  const std::vector<DataFile>& live,
                                                  std::int64_t target_file_size_bytes) {
  if (target_file_size_bytes <= 0) {
    Throw(ErrorCode::kInvalidArgument, "target file size must be positive");
  }
  std::map<std::string, std::vector<DataFile>> by_partition;
  for (const auto& file : live) {
    if (file.spec_id != metadata.current_spec_id) continue;
    if (file.file_size_bytes >= target_file_size_bytes) continue;
    by_partition[PartitionSignature(file.partition)].push_back(file);
  }
  std::vector<std::vector<DataFile>> groups;
  for (auto& [signature, files] : by_partition) {
    std::sort(files.begin(), files.end(), [](const DataFile& a, const DataFile& b) {
      if (a.file_size_bytes != b.file_size_bytes) return a.file_size_bytes > b.file_size_bytes;
      return a.key < b.key;
    });
    std::vector<std::vector<DataFile>> bins;
    std::vector<std::int64_t> fill;
    for (auto& file : files) {
      size_t b = 0;
      while (b < bins.size() && fill[b] + file.file_size_bytes > target_file_size_bytes) ++b;
      if (b == bins.size()) {
        bins.emplace_back();
        fill.push_back(0);
      }
      fill[b] += file.file_size_bytes;
      bins[b].push_back(std::move(file));
    }
    for (auto& bin : bins) {
      if (bin.size() >= 2) groups.push_back(std::move(bin));
    }
  }
  return groups;
}

MaintenanceReport Compact(const Catalog& catalog, std::string_view table, std::string_view branch,
                          std::int64_t target_file_size_bytes) {
  Transaction tx(catalog, std::string(branch));
  const TableMetadata& metadata = tx.Metadata(table);
  const std::vector<DataFile> live = tx.LiveFiles(table);
  const auto groups = PlanCompaction(metadata, live, target_file_size_bytes);
  if (groups.empty()) {
    Throw(ErrorCode::kNothingToCompact,
          "no partition of " + std::string(table) + " has two files under the target size");
  }
  const Schema& schema = metadata.CurrentSchema();
  const auto all_columns = ResolveProjection(schema, {});
  MaintenanceReport report;
  report.operation = "compact";
  report.files_before = static_cast<std::int64_t>(live.size());

  // Merged outputs can come out smaller than their inputs, so a second pass
  // may find bins the first could not fill. Repeat until the plan is empty
  // so that an immediate re-run has nothing to do.
  std::map<std::string, DataFile> working;
  for (const auto& file : live) working.emplace(file.key, file);
  std::set<std::string> original;
  for (const auto& file : live) original.insert(file.key);
  std::vector<DataFile> removed;
  std::int64_t bytes_in = 0;
  for (auto plan = groups; !plan.empty();) {
    for (const auto& group : plan) {
      std::vector<Row> rows;
      for (const auto& file : group) {
        for (auto& row : ReadDataFile(catalog.store(), file.key, schema, all_columns)) {
          rows.push_back(std::move(row));
        }
        working.erase(file.key);
        if (original.count(file.key)) {
          bytes_in += file.file_size_bytes;
          removed.push_back(file);
        } else {
          // An output of an earlier pass that no commit ever referenced.
          catalog.store().Delete(file.key);
        }
      }
      const std::string key = metadata.location + "/data/" + RandomToken() + ".mlf";
      DataFile merged = WriteDataFile(catalog.store(), schema, rows, key);
      merged.spec_id = group.front().spec_id;
      merged.partition = group.front().partition;
      working.emplace(merged.key, std::move(merged));
    }
    std::vector<DataFile> current;
    for (const auto& [key, file] : working) current.push_back(file);
    plan = PlanCompaction(metadata, current, target_file_size_bytes);
  }
  std::vector<DataFile> added;
  std::int64_t bytes_out = 0;
  for (const auto& [key, file] : working) {
    if (original.count(key)) continue;
    bytes_out += file.file_size_bytes;
    added.push_back(file);
  }
  tx.Replace(table, removed, added);
  report.files_after = static_cast<std::int64_t>(working.size());
  report.bytes_reclaimed = std::max<std::int64_t>(0, bytes_in - bytes_out);
  report.commit = tx.Commit("minilake", "compact " + std::string(table));
  return report;
}

MaintenanceReport ExpireTableSnapshots(const Catalog& catalog, std::string_view table,
                                       std::string_view branch, std::int64_t older_than_ms,
                                       std::int64_t keep_last) {
  Transaction tx(catalog, std::string(branch));
  const size_t before = tx.Metadata(table).snapshots.size();
  tx.ExpireSnapshots(table, older_than_ms, keep_last);
  MaintenanceReport report;
  report.operation = "expire_snapshots";
  report.snapshots_removed = static_cast<std::int64_t>(before - tx.Metadata(table).snapshots.size());
  report.commit = tx.Commit("minilake", "expire snapshots of " + std::string(table));
  return report;
}

namespace {

struct Reachable {
  std::set<std::string> commits;
  std::set<std::string> metadata;       // the table's metadata in any reachable commit
  std::set<std::string> head_metadata;  // the table's metadata at a ref
};

Reachable WalkRefs(const Catalog& catalog, const std::string& table) {
  const ObjectStore& store = catalog.store();
  Reachable out;
  std::deque<std::string> queue;
  for (const auto& ref : catalog.ListRefs()) {
    const auto target = store.ReadRef(ref);
    if (!target) continue;
    queue.push_back(*target);
    const CatalogCommit head = catalog.LoadCommit(*target);
    if (auto it = head.tree.find(table); it != head.tree.end()) out.head_metadata.insert(it->second);
  }
  while (!queue.empty()) {
    std::string hash = std::move(queue.front());
    queue.pop_front();
    if (!out.commits.insert(hash).second) continue;
    const CatalogCommit commit = catalog.LoadCommit(hash);
    if (auto it = commit.tree.find(table); it != commit.tree.end()) out.metadata.insert(it->second);
    if (commit.parent) queue.push_back(*commit.parent);
    if (auto source = commit.MergedFrom()) queue.push_back(*source);
  }
  return out;
}

std::set<std::string> TableObjectsOf(const ObjectStore& store, const Reachable& reachable) {
  std::set<std::string> referenced = reachable.metadata;
  for (const auto& key : reachable.head_metadata) {
    const TableMetadata metadata = LoadMetadata(store, key);
    for (const auto& snapshot : metadata.snapshots) {
      referenced.insert(snapshot.manifest_keys.begin(), snapshot.manifest_keys.end());
      // A manifest may still list files as deleted after the snapshots that
      // held them expired, so only live files count.
      for (const auto& file : LiveFiles(store, metadata, snapshot.snapshot_id)) {
        referenced.insert(file.key);
      }
    }
  }
  return referenced;
}

}  // namespace

std::set<std::string> ReferencedTableObjects(const Catalog& catalog, std::string_view table) {
  return TableObjectsOf(catalog.store(), WalkRefs(catalog, std::string(table)));
}
MaintenanceReport RemoveOrphanFiles(const Catalog& catalog, std::string_view table,
                                    std::int64_t grace_period_ms, std::int64_t now_ms) {
  if (grace_period_ms < 0) Throw(ErrorCode::kInvalidArgument, "grace period must be >= 0");
  if (!IsIdentifier(table)) {
    Throw(ErrorCode::kInvalidArgument, "invalid table name '" + std::string(table) + "'");
  }
  const ObjectStore& store = catalog.store();
  // Listing first means objects written after this point are never candidates.
  const auto table_keys = store.List("tables/" + std::string(table) + "/");
  const auto commit_keys = store.List("commits/");
  const Reachable reachable = WalkRefs(catalog, std::string(table));
  const auto referenced = TableObjectsOf(store, reachable);
  std::vector<std::string> candidates;
  for (const auto& key : table_keys) {
    if (!referenced.count(key)) candidates.push_back(key);
  }
  for (const auto& key : commit_keys) {
    if (!reachable.commits.count(key.substr(key.find('/') + 1))) candidates.push_back(key);
  }
  MaintenanceReport report;
  report.operation = "gc";
  for (const auto& key : candidates) {
    ObjectInfo info;
    try {
      info = store.Stat(key);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNotFound) continue;
      throw;
    }
    if (info.modified_ms > now_ms - grace_period_ms) continue;
    store.Delete(key);
    ++report.keys_deleted;
    report.bytes_reclaimed += static_cast<std::int64_t>(info.size_bytes);
  }
  return report;
}

}  // namespace minilake
