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

#include "minilake/catalog.h"

#include <algorithm>
#include <chrono>
#include <deque>
#include <random>
#include <set>
#include <thread>

#include "minilake/error.h"
#include "minilake/table_change.h"
#include "util.h"

namespace minilake {

using nlohmann::json;

std::optional<std::string> CatalogCommit::MergedFrom() const {
  const auto pos = message.rfind(kMergedFromTrailer);
  if (pos == std::string::npos || (pos != 0 && message[pos - 1] != '\n')) return std::nullopt;
  std::string hash = message.substr(pos + kMergedFromTrailer.size());
  if (!IsValidHash(hash)) return std::nullopt;
  return hash;
}

bool CatalogCommit::Touches(std::string_view table) const {
  return std::any_of(change_summary.begin(), change_summary.end(),
                     [&](const ChangeSummaryEntry& e) { return e.table == table; });
}

std::string EncodeCommitPayload(const CatalogCommit& commit) {
  json summary = json::array();
  for (const auto& e : commit.change_summary) {
    summary.push_back({{"operation", e.operation}, {"table", e.table}});
  }
  json tree = json::object();
  for (const auto& [name, key] : commit.tree) tree[name] = key;
  json payload = {{"author", commit.author},
                  {"change_summary", std::move(summary)},
                  {"message", commit.message},
                  {"parent", commit.parent ? json(*commit.parent) : json(nullptr)},
                  {"timestamp_ms", commit.timestamp_ms},
                  {"tree", std::move(tree)}};
  return CanonicalDump(payload);
}

namespace {

CatalogCommit DecodeCommitPayload(std::string_view text, std::string_view hash) {
  const std::string where = "commit " + std::string(hash);
  try {
    const json j = json::parse(text);
    if (!j.is_object() || j.size() != 6) Throw(ErrorCode::kCorruptCommit, where + ": bad shape");
    CatalogCommit commit;
    commit.hash = std::string(hash);
    commit.author = j.at("author").get<std::string>();
    commit.message = j.at("message").get<std::string>();
    commit.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    const auto& parent = j.at("parent");
    if (!parent.is_null()) {
      commit.parent = parent.get<std::string>();
      if (!IsValidHash(*commit.parent)) Throw(ErrorCode::kCorruptCommit, where + ": bad parent");
    }
    for (const auto& [name, key] : j.at("tree").items()) {
      commit.tree.emplace(name, key.get<std::string>());
    }
    for (const auto& e : j.at("change_summary")) {
      commit.change_summary.push_back(
          {e.at("table").get<std::string>(), e.at("operation").get<std::string>()});
    }
    return commit;
  } catch (const json::exception& e) {
    Throw(ErrorCode::kCorruptCommit, where + ": " + e.what());
  }
}

bool IsRefSegmentChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '_' || c == '.';
}

}  // namespace

std::string CommitKey(std::string_view hash) { return "commits/" + std::string(hash); }

std::string BranchRef(std::string_view branch) { return "refs/heads/" + std::string(branch); }

std::string TagRef(std::string_view tag) { return "refs/tags/" + std::string(tag); }

bool IsValidRefName(std::string_view name) {
  if (name.empty() || name.size() > 200) return false;
  size_t start = 0;
  while (start <= name.size()) {
    const size_t end = std::min(name.find('/', start), name.size());
    const auto segment = name.substr(start, end - start);
    if (segment.empty() || segment == "." || segment == ".." || segment.front() == '.') {
      return false;
    }
    if (!std::all_of(segment.begin(), segment.end(), IsRefSegmentChar)) return false;
    start = end + 1;
  }
  return true;
}

Catalog::Catalog(std::shared_ptr<const ObjectStore> store, CommitOptions options)
    : store_(std::move(store)), options_(std::move(options)) {}

bool Catalog::IsInitialized() const { return !store_->ListRefs().empty(); }

void Catalog::Init(std::string_view default_branch) const {
  if (!IsValidRefName(default_branch)) {
    Throw(ErrorCode::kInvalidArgument, "invalid branch name '" + std::string(default_branch) + "'");
  }
  if (IsInitialized()) Throw(ErrorCode::kAlreadyInitialized, "warehouse is already initialized");
  CatalogCommit root;
  root.timestamp_ms = NowMs();
  root.author = "minilake";
  root.message = "init";
  const std::string hash = WriteCommit(root);
  if (!store_->CasRef(BranchRef(default_branch), std::nullopt, hash)) {
    Throw(ErrorCode::kAlreadyInitialized, "warehouse is already initialized");
  }
}

void Catalog::CreateBranch(std::string_view name, std::string_view from) const {
  if (!IsValidRefName(name)) {
    Throw(ErrorCode::kInvalidArgument, "invalid branch name '" + std::string(name) + "'");
  }
  const CatalogCommit at = Resolve(from);
  if (!store_->CasRef(BranchRef(name), std::nullopt, at.hash)) {
    Throw(ErrorCode::kRefExists, "branch '" + std::string(name) + "' already exists");
  }
}

void Catalog::CreateTag(std::string_view name, std::string_view at) const {
  if (!IsValidRefName(name)) {
    Throw(ErrorCode::kInvalidArgument, "invalid tag name '" + std::string(name) + "'");
  }
  const CatalogCommit commit = Resolve(at);
  if (!store_->CasRef(TagRef(name), std::nullopt, commit.hash)) {
    Throw(ErrorCode::kRefExists, "tag '" + std::string(name) + "' already exists");
  }
}

std::vector<std::string> Catalog::ListRefs() const { return store_->ListRefs(); }

std::vector<std::string> Catalog::ListBranches() const {
  std::vector<std::string> out;
  constexpr std::string_view kPrefix = "refs/heads/";
  for (const auto& ref : store_->ListRefs()) {
    if (ref.rfind(kPrefix, 0) == 0) out.push_back(ref.substr(kPrefix.size()));
  }
  return out;
}

std::vector<std::string> Catalog::ListTags() const {
  std::vector<std::string> out;
  constexpr std::string_view kPrefix = "refs/tags/";
  for (const auto& ref : store_->ListRefs()) {
    if (ref.rfind(kPrefix, 0) == 0) out.push_back(ref.substr(kPrefix.size()));
  }
  return out;
}

std::string Catalog::BranchHead(std::string_view branch) const {
  if (!IsValidRefName(branch)) {
    Throw(ErrorCode::kUnknownBranch, "unknown branch '" + std::string(branch) + "'");
  }
  auto head = store_->ReadRef(BranchRef(branch));
  if (!head) Throw(ErrorCode::kUnknownBranch, "unknown branch '" + std::string(branch) + "'");
  return *head;
}

CatalogCommit Catalog::LoadCommit(std::string_view hash) const {
  if (!IsValidHash(hash)) Throw(ErrorCode::kUnknownRef, "not a commit hash: " + std::string(hash));
  std::string payload;
  try {
    payload = store_->Get(CommitKey(hash));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) {
      Throw(ErrorCode::kUnknownRef, "no commit " + std::string(hash));
    }
    throw;
  }
  if (Sha256Hex(payload) != hash) {
    Throw(ErrorCode::kCorruptCommit, "commit " + std::string(hash) + " fails its digest check");
  }
  CatalogCommit commit = DecodeCommitPayload(payload, hash);
  if (EncodeCommitPayload(commit) != payload) {
    Throw(ErrorCode::kCorruptCommit, "commit " + std::string(hash) + " is not canonical");
  }
  return commit;
}

CatalogCommit Catalog::Resolve(std::string_view ref_or_hash) const {
  if (IsValidHash(ref_or_hash) && store_->Exists(CommitKey(ref_or_hash))) {
    return LoadCommit(ref_or_hash);
  }
  std::vector<std::string> candidates;
  if (ref_or_hash.rfind("refs/", 0) == 0) {
    candidates.emplace_back(ref_or_hash);
  } else if (IsValidRefName(ref_or_hash)) {
    candidates.push_back(BranchRef(ref_or_hash));
    candidates.push_back(TagRef(ref_or_hash));
  }
  for (const auto& ref : candidates) {
    if (!IsValidRefName(ref)) continue;
    if (auto target = store_->ReadRef(ref)) return LoadCommit(*target);
  }
  Throw(ErrorCode::kUnknownRef, "cannot resolve '" + std::string(ref_or_hash) + "'");
}

TableMetadata Catalog::LookupTable(const CatalogCommit& commit, std::string_view table) const {
  const auto it = commit.tree.find(std::string(table));
  if (it == commit.tree.end()) {
    Throw(ErrorCode::kUnknownTable, "unknown table '" + std::string(table) + "'");
  }
  return LoadMetadata(*store_, it->second);
}

std::vector<std::string> Catalog::ListTables(std::string_view ref_or_hash) const {
  std::vector<std::string> names;
  for (const auto& [name, key] : Resolve(ref_or_hash).tree) names.push_back(name);
  return names;
}

std::vector<CatalogCommit> Catalog::Log(std::string_view branch,
                                        std::optional<std::string_view> table) const {
  std::vector<CatalogCommit> out;
  std::optional<std::string> next = BranchHead(branch);
  while (next) {
    CatalogCommit commit = LoadCommit(*next);
    next = commit.parent;
    if (!table || commit.Touches(*table)) out.push_back(std::move(commit));
  }
  return out;
}

std::string Catalog::WriteCommit(CatalogCommit& commit) const {
  const std::string payload = EncodeCommitPayload(commit);
  commit.hash = Sha256Hex(payload);
  try {
    store_->Put(CommitKey(commit.hash), payload);
  } catch (const Error& e) {
    // Same content means same key; an identical commit is already stored.
    if (e.code() != ErrorCode::kAlreadyExists) throw;
  }
  return commit.hash;
}

bool Catalog::AdvanceBranch(std::string_view branch, const std::string& expected,
                            const std::string& next) const {
  return store_->CasRef(BranchRef(branch), expected, next);
}

std::vector<std::string> Catalog::Predecessors(const CatalogCommit& commit) const {
  std::vector<std::string> out;
  if (commit.parent) out.push_back(*commit.parent);
  if (auto source = commit.MergedFrom()) out.push_back(*source);
  return out;
}

bool Catalog::IsAncestor(std::string_view ancestor, std::string_view descendant) const {
  std::set<std::string> visited;
  std::deque<std::string> queue{std::string(descendant)};
  while (!queue.empty()) {
    std::string hash = std::move(queue.front());
    queue.pop_front();
    if (hash == ancestor) return true;
    if (!visited.insert(hash).second) continue;
    for (auto& p : Predecessors(LoadCommit(hash))) queue.push_back(std::move(p));
  }
  return false;
}

std::optional<std::string> Catalog::LowestCommonAncestor(std::string_view a,
                                                         std::string_view b) const {
  std::set<std::string> reachable_from_a;
  std::deque<std::string> queue{std::string(a)};
  while (!queue.empty()) {
    std::string hash = std::move(queue.front());
    queue.pop_front();
    if (!reachable_from_a.insert(hash).second) continue;
    for (auto& p : Predecessors(LoadCommit(hash))) queue.push_back(std::move(p));
  }
  std::set<std::string> visited;
  queue = {std::string(b)};
  while (!queue.empty()) {
    std::string hash = std::move(queue.front());
    queue.pop_front();
    if (reachable_from_a.count(hash)) return hash;
    if (!visited.insert(hash).second) continue;
    for (auto& p : Predecessors(LoadCommit(hash))) queue.push_back(std::move(p));
  }
  return std::nullopt;
}

void Catalog::Backoff(int attempt) const {
  if (options_.backoff_cap_ms <= 0) return;
  const std::int64_t ceiling =
      std::min(options_.backoff_cap_ms, options_.backoff_base_ms << std::min(attempt, 20));
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const std::int64_t sleep_ms = std::uniform_int_distribution<std::int64_t>(0, ceiling)(rng);
  std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
}

std::string Catalog::Merge(std::string_view source, std::string_view target,
                           std::string_view author, std::string_view message) const {
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) Backoff(attempt);
    const std::string source_head = BranchHead(source);
    const std::string target_head = BranchHead(target);
    if (IsAncestor(source_head, target_head)) return target_head;
    if (IsAncestor(target_head, source_head)) {
      if (AdvanceBranch(target, target_head, source_head)) return source_head;
      continue;
    }
    const auto base_hash = LowestCommonAncestor(source_head, target_head);
    if (!base_hash) {
      Throw(ErrorCode::kMergeConflict, "branches share no history");
    }
    const CatalogCommit base = LoadCommit(*base_hash);
    const CatalogCommit ours = LoadCommit(target_head);
    const CatalogCommit theirs = LoadCommit(source_head);

    auto lookup = [](const CatalogCommit& c, const std::string& name) -> std::optional<std::string> {
      const auto it = c.tree.find(name);
      if (it == c.tree.end()) return std::nullopt;
      return it->second;
    };
    std::set<std::string> names;
    for (const auto& [name, key] : base.tree) names.insert(name);
    for (const auto& [name, key] : theirs.tree) names.insert(name);

    const std::int64_t now = NowMs();
    CatalogCommit merged;
    merged.parent = target_head;
    merged.timestamp_ms = std::max(now, ours.timestamp_ms);
    merged.author = std::string(author);
    merged.message = std::string(message);
    if (!merged.message.empty()) merged.message += "\n\n";
    merged.message += std::string(kMergedFromTrailer) + source_head;
    merged.tree = ours.tree;

    std::vector<std::string> conflicts;
    for (const auto& name : names) {
      const auto b = lookup(base, name);
      const auto s = lookup(theirs, name);
      const auto t = lookup(ours, name);
      if (s == b || s == t) continue;
      if (t == b) {
        if (s) {
          merged.tree[name] = *s;
        } else {
          merged.tree.erase(name);
        }
        merged.change_summary.push_back({name, "MERGE"});
        continue;
      }
      try {
        if (!b || !s || !t) Throw(ErrorCode::kConflict, "table created or removed on both sides");
        const TableMetadata base_meta = LoadMetadata(*store_, *b);
        const TableMetadata source_meta = LoadMetadata(*store_, *s);
        TableMetadata meta = LoadMetadata(*store_, *t);
        for (const auto& change : ChangesSince(*store_, base_meta, source_meta)) {
          RebaseTarget rebase_target;
          rebase_target.table_exists = true;
          for (const auto& f : CurrentLiveFiles(*store_, meta)) {
            rebase_target.live_keys.insert(f.key);
          }
          ValidateRebase(change, rebase_target);
          meta = ApplyChange(*store_, meta, change, now);
        }
        merged.tree[name] = StoreMetadata(*store_, meta);
        merged.change_summary.push_back({name, "MERGE"});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kConflict) throw;
        conflicts.push_back(name);
      }
    }
    if (!conflicts.empty()) {
      std::string list;
      for (const auto& name : conflicts) list += (list.empty() ? "" : ", ") + name;
      Throw(ErrorCode::kMergeConflict, "conflicting tables: " + list);
    }
    WriteCommit(merged);
    if (AdvanceBranch(target, target_head, merged.hash)) return merged.hash;
  }
  Throw(ErrorCode::kRetriesExhausted, "merge lost the ref race " +
                                          std::to_string(options_.max_retries + 1) + " times");
}

}  // namespace minilake
