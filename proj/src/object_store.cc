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

#include "minilake/object_store.h"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <random>

#include "minilake/error.h"

namespace minilake {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kRefPrefix = "refs/";

[[noreturn]] void ThrowErrno(const std::string& what, const fs::path& path) {
  Throw(ErrorCode::kIoError, what + " " + path.string() + ": " + std::strerror(errno));
}

class FileDescriptor {
 public:
  explicit FileDescriptor(int fd) : fd_(fd) {}
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

void WriteAll(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("write", path);
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
}

void SyncDirectory(const fs::path& dir) {
  FileDescriptor fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY));
  if (fd.get() >= 0) ::fsync(fd.get());
}

void WriteTempFile(const fs::path& path, std::string_view data, bool sync) {
  FileDescriptor fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644));
  if (fd.get() < 0) ThrowErrno("create", path);
  WriteAll(fd.get(), data, path);
  if (sync && ::fsync(fd.get()) != 0) ThrowErrno("fsync", path);
}

std::optional<std::string> ReadWholeFile(const fs::path& path) {
  FileDescriptor fd(::open(path.c_str(), O_RDONLY));
  if (fd.get() < 0) {
    if (errno == ENOENT || errno == ENOTDIR) return std::nullopt;
    ThrowErrno("open", path);
  }
  std::string out;
  char buffer[1 << 16];
  for (;;) {
    ssize_t n = ::read(fd.get(), buffer, sizeof(buffer));
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("read", path);
    }
    if (n == 0) break;
    out.append(buffer, static_cast<size_t>(n));
  }
  return out;
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Throw(ErrorCode::kIoError, "mkdir " + dir.string() + ": " + ec.message());
}

std::string EscapeRefName(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '%') {
      out += "%25";
    } else if (c == '/') {
      out += "%2F";
    } else {
      out += c;
    }
  }
  return out;
}

std::string UnescapeRefName(std::string_view name) {
  std::string out;
  for (size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && name.substr(i, 3) == "%2F") {
      out += '/';
      i += 2;
    } else if (name[i] == '%' && name.substr(i, 3) == "%25") {
      out += '%';
      i += 2;
    } else {
      out += name[i];
    }
  }
  return out;
}

void ValidateRefName(std::string_view name) {
  if (name.size() <= kRefPrefix.size() || name.substr(0, kRefPrefix.size()) != kRefPrefix) {
    Throw(ErrorCode::kInvalidArgument, "ref name must start with 'refs/': " + std::string(name));
  }
  for (char c : name) {
    if (static_cast<unsigned char>(c) < 0x20) {
      Throw(ErrorCode::kInvalidArgument, "control character in ref name");
    }
  }
}

// Exclusive flock held for the lifetime of the object. flock locks belong to
// the open file description, so this also excludes other threads of the same
// process that open the lock file independently.
class RefLock {
 public:
  explicit RefLock(const fs::path& path)
      : fd_(::open(path.c_str(), O_RDWR | O_CREAT, 0644)) {
    if (fd_.get() < 0) ThrowErrno("open lock", path);
    while (::flock(fd_.get(), LOCK_EX) != 0) {
      if (errno != EINTR) ThrowErrno("flock", path);
    }
  }
  ~RefLock() { ::flock(fd_.get(), LOCK_UN); }

 private:
  FileDescriptor fd_;
};

}  // namespace

void ValidateKey(std::string_view key) {
  if (key.empty()) Throw(ErrorCode::kInvalidKey, "empty object key");
  if (key.find('\0') != std::string_view::npos) {
    Throw(ErrorCode::kInvalidKey, "NUL in object key");
  }
  size_t start = 0;
  while (true) {
    size_t end = key.find('/', start);
    std::string_view segment =
        key.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (segment.empty() || segment == "." || segment == "..") {
      Throw(ErrorCode::kInvalidKey, "malformed object key '" + std::string(key) + "'");
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

bool IsValidHash(std::string_view hash) {
  return hash.size() == 64 && std::all_of(hash.begin(), hash.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string RandomToken() {
  thread_local std::mt19937_64 rng = [] {
    std::random_device device;
    std::seed_seq seed{device(), device(), device(), device(), device(), device()};
    return std::mt19937_64(seed);
  }();
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(32, '0');
  for (int half = 0; half < 2; ++half) {
    std::uint64_t bits = rng();
    for (int i = 0; i < 16; ++i) {
      out[half * 16 + i] = kHex[(bits >> (60 - 4 * i)) & 0xf];
    }
  }
  return out;
}

ObjectStore::ObjectStore(fs::path root) : ObjectStore(std::move(root), Options{}) {}

ObjectStore::ObjectStore(fs::path root, Options options)
    : root_(std::move(root)), options_(options) {
  EnsureDirectory(root_ / "objects");
  EnsureDirectory(root_ / "refs");
  EnsureDirectory(root_ / "tmp");
}

fs::path ObjectStore::ObjectPath(std::string_view key) const {
  ValidateKey(key);
  return root_ / "objects" / fs::path(std::string(key));
}

fs::path ObjectStore::RefPath(std::string_view name) const {
  ValidateRefName(name);
  return root_ / "refs" / EscapeRefName(name);
}

void ObjectStore::Notify(ObjectAccess access, std::string_view key) const {
  if (observer_) observer_(access, key);
}

void ObjectStore::Put(std::string_view key, std::string_view payload) const {
  fs::path path = ObjectPath(key);
  Notify(ObjectAccess::kPut, key);
  EnsureDirectory(path.parent_path());
  fs::path temp = root_ / "tmp" / RandomToken();
  WriteTempFile(temp, payload, options_.sync);
  // link(2) fails with EEXIST atomically, which gives write-once semantics
  // without a lock.
  int rc = ::link(temp.c_str(), path.c_str());
  int saved = errno;
  ::unlink(temp.c_str());
  if (rc != 0) {
    errno = saved;
    if (saved == EEXIST) {
      Throw(ErrorCode::kAlreadyExists, "object exists: " + std::string(key));
    }
    ThrowErrno("link", path);
  }
  if (options_.sync) SyncDirectory(path.parent_path());
}

std::string ObjectStore::Get(std::string_view key) const {
  fs::path path = ObjectPath(key);
  Notify(ObjectAccess::kGet, key);
  auto data = ReadWholeFile(path);
  if (!data) Throw(ErrorCode::kNotFound, "no such object: " + std::string(key));
  return std::move(*data);
}

bool ObjectStore::Exists(std::string_view key) const {
  struct stat st;
  return ::stat(ObjectPath(key).c_str(), &st) == 0 && S_ISREG(st.st_mode);
}

ObjectInfo ObjectStore::Stat(std::string_view key) const {
  fs::path path = ObjectPath(key);
  struct stat st;
  if (::stat(path.c_str(), &st) != 0) {
    if (errno == ENOENT || errno == ENOTDIR) {
      Throw(ErrorCode::kNotFound, "no such object: " + std::string(key));
    }
    ThrowErrno("stat", path);
  }
  ObjectInfo info;
  info.size_bytes = static_cast<std::uint64_t>(st.st_size);
  info.modified_ms = static_cast<std::int64_t>(st.st_mtim.tv_sec) * 1000 +
                     st.st_mtim.tv_nsec / 1000000;
  return info;
}

std::vector<std::string> ObjectStore::List(std::string_view prefix) const {
  fs::path objects = root_ / "objects";
  size_t slash = prefix.rfind('/');
  fs::path start = objects;
  if (slash != std::string_view::npos) {
    start = objects / fs::path(std::string(prefix.substr(0, slash)));
  }
  std::vector<std::string> keys;
  std::error_code ec;
  if (!fs::is_directory(start, ec)) return keys;
  fs::recursive_directory_iterator it(start, ec), end;
  if (ec) Throw(ErrorCode::kIoError, "list " + start.string() + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) Throw(ErrorCode::kIoError, "list " + start.string() + ": " + ec.message());
    if (!it->is_regular_file(ec)) continue;
    std::string key = it->path().lexically_relative(objects).generic_string();
    if (key.compare(0, prefix.size(), prefix) == 0) keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

void ObjectStore::Delete(std::string_view key) const {
  fs::path path = ObjectPath(key);
  Notify(ObjectAccess::kDelete, key);
  if (::unlink(path.c_str()) != 0) {
    if (errno == ENOENT || errno == ENOTDIR) {
      Throw(ErrorCode::kNotFound, "no such object: " + std::string(key));
    }
    ThrowErrno("unlink", path);
  }
}

bool ObjectStore::CasRef(std::string_view name, const std::optional<std::string>& expected,
                         std::string_view target) const {
  if (!IsValidHash(target)) {
    Throw(ErrorCode::kInvalidArgument, "ref target is not a hash: " + std::string(target));
  }
  fs::path path = RefPath(name);
  fs::path refs = root_ / "refs";
  RefLock lock(refs / ("." + EscapeRefName(name) + ".lock"));
  if (ReadRef(name) != expected) return false;
  fs::path temp = refs / (".tmp-" + RandomToken());
  WriteTempFile(temp, std::string(target) + "\n", options_.sync);
  if (::rename(temp.c_str(), path.c_str()) != 0) {
    int saved = errno;
    ::unlink(temp.c_str());
    errno = saved;
    ThrowErrno("rename", path);
  }
  if (options_.sync) SyncDirectory(refs);
  return true;
}

std::optional<std::string> ObjectStore::ReadRef(std::string_view name) const {
  fs::path path = RefPath(name);
  auto data = ReadWholeFile(path);
  if (!data) return std::nullopt;
  std::string hash = *data;
  if (!hash.empty() && hash.back() == '\n') hash.pop_back();
  if (!IsValidHash(hash)) {
    Throw(ErrorCode::kIoError, "malformed ref file " + path.string());
  }
  return hash;
}

std::vector<std::string> ObjectStore::ListRefs() const {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "refs", ec)) {
    std::string file = entry.path().filename().string();
    if (file.empty() || file[0] == '.') continue;
    names.push_back(UnescapeRefName(file));
  }
  if (ec) Throw(ErrorCode::kIoError, "list refs: " + ec.message());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace minilake
