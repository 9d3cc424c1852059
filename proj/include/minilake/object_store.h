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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace minilake {

/// Throws kInvalidKey unless `key` is a non-empty relative '/'-separated path
/// without empty, "." or ".." segments.
void ValidateKey(std::string_view key);

/// True for a 64-character lowercase hex string (a SHA-256 digest).
bool IsValidHash(std::string_view hash);

/// 128 random bits rendered as 32 lowercase hex characters.
std::string RandomToken();

struct ObjectInfo {
  std::uint64_t size_bytes = 0;
  std::int64_t modified_ms = 0;
};

enum class ObjectAccess { kPut, kGet, kDelete };

/// Write-once object storage on a local directory.
///
/// Objects live at `<root>/objects/<key>` and are never modified after they
/// are written. Refs live at `<root>/refs/<escaped name>`, one file per ref
/// holding a commit hash and a trailing newline; the only way to change a ref
/// is CasRef, which serializes on a per-ref advisory lock and publishes the
/// new value with an atomic rename. Safe for concurrent use from any number
/// of threads and processes.
class ObjectStore {
 public:
  struct Options {
    /// fsync objects and refs before they become visible.
    bool sync = true;
  };

  using Observer = std::function<void(ObjectAccess, std::string_view key)>;

  explicit ObjectStore(std::filesystem::path root);
  ObjectStore(std::filesystem::path root, Options options);

  const std::filesystem::path& root() const { return root_; }

  /// Throws kAlreadyExists if the key is occupied.
  void Put(std::string_view key, std::string_view payload) const;
  std::string Get(std::string_view key) const;
  bool Exists(std::string_view key) const;
  ObjectInfo Stat(std::string_view key) const;
  /// Keys starting with `prefix`, sorted lexicographically.
  std::vector<std::string> List(std::string_view prefix) const;
  void Delete(std::string_view key) const;

  /// Sets `name` to `target` iff its current value equals `expected`
  /// (std::nullopt matches an absent ref). Returns whether the swap happened.
  bool CasRef(std::string_view name, const std::optional<std::string>& expected,
              std::string_view target) const;
  std::optional<std::string> ReadRef(std::string_view name) const;
  /// All ref names, sorted.
  std::vector<std::string> ListRefs() const;

  /// Test hook; called for every object put/get/delete. Not synchronized:
  /// install before sharing the store across threads.
  void SetObserver(Observer observer) { observer_ = std::move(observer); }

 private:
  std::filesystem::path ObjectPath(std::string_view key) const;
  std::filesystem::path RefPath(std::string_view name) const;
  void Notify(ObjectAccess access, std::string_view key) const;

  std::filesystem::path root_;
  Options options_;
  Observer observer_;
};

}  // namespace minilake
