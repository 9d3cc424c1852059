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

#include "minilake/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "minilake/catalog.h"
#include "minilake/error.h"
#include "util.h"

namespace minilake {

namespace {

std::int64_t ParseInteger(std::string_view key, std::string_view value, std::int64_t min,
                          int line) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || out < min) {
    Throw(ErrorCode::kConfigParseError, "line " + std::to_string(line) + ": " + std::string(key) +
                                            " must be an integer >= " + std::to_string(min) +
                                            ", got '" + std::string(value) + "'");
  }
  return out;
}

}  // namespace

Config ParseConfig(std::string_view text) {
  Config config;
  int line_number = 0;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      Throw(ErrorCode::kConfigParseError,
            "line " + std::to_string(line_number) + ": expected key=value");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key == "max_retries") {
      const auto v = ParseInteger(key, value, 0, line_number);
      if (v > 1000) {
        Throw(ErrorCode::kConfigParseError,
              "line " + std::to_string(line_number) + ": max_retries must be <= 1000");
      }
      config.max_retries = static_cast<int>(v);
    } else if (key == "target_file_size_bytes") {
      config.target_file_size_bytes = ParseInteger(key, value, 1, line_number);
    } else if (key == "gc_grace_ms") {
      config.gc_grace_ms = ParseInteger(key, value, 0, line_number);
    } else if (key == "default_branch") {
      if (!IsValidRefName(value)) {
        Throw(ErrorCode::kConfigParseError, "line " + std::to_string(line_number) +
                                                ": invalid branch name '" + std::string(value) + "'");
      }
      config.default_branch = std::string(value);
    } else {
      Throw(ErrorCode::kConfigParseError,
            "line " + std::to_string(line_number) + ": unknown key '" + std::string(key) + "'");
    }
  }
  return config;
}

Config LoadConfig(const std::filesystem::path& root) {
  const auto path = root / kConfigFileName;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) return Config{};
    Throw(ErrorCode::kIoError, "cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

}  // namespace minilake
