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

#include <stdexcept>
#include <string>
#include <string_view>

namespace minilake {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidKey,
  kAlreadyExists,
  kNotFound,
  kIoError,
  kSchemaViolation,
  kCorruptFile,
  kUnsupportedTransform,
  kUnknownColumn,
  kDuplicateColumn,
  kDropOfPartitionSource,
  kUnknownSnapshot,
  kCorruptMetadata,
  kUnknownBranch,
  kUnknownTable,
  kTableExists,
  kTypeMismatch,
  kConflict,
  kRetriesExhausted,
  kTransactionClosed,
  kAlreadyInitialized,
  kRefExists,
  kUnknownRef,
  kCorruptCommit,
  kMergeConflict,
  kParseError,
  kNoSnapshotAsOf,
  kNothingToCompact,
  kDuplicateSourceKey,
  kConfigParseError,
  kInjectedFault,
};

/// Stable name used in CLI diagnostics (`error: <name>: <message>`).
std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Throw(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace minilake
