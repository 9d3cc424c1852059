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
#include <string>
#include <string_view>

namespace minilake {

/// Warehouse settings from `<root>/minilake.conf`.
struct Config {
  int max_retries = 5;
  std::int64_t target_file_size_bytes = 8388608;
  std::int64_t gc_grace_ms = 86400000;
  std::string default_branch = "main";

  bool operator==(const Config&) const = default;
};

inline constexpr std::string_view kConfigFileName = "minilake.conf";

/// `key=value` per line; blank lines and lines starting with '#' are
/// ignored. Throws kConfigParseError on a malformed line, an unknown key, or
/// an out-of-range value.
Config ParseConfig(std::string_view text);

/// Defaults when the file does not exist.
Config LoadConfig(const std::filesystem::path& root);

}  // namespace minilake
