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

#include "minilake/error.h"

namespace minilake {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kInvalidKey:
      return "InvalidKey";
    case ErrorCode::kAlreadyExists:
      return "AlreadyExists";
    case ErrorCode::kNotFound:
      return "NotFound";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kSchemaViolation:
      return "SchemaViolation";
    case ErrorCode::kCorruptFile:
      return "CorruptFile";
    case ErrorCode::kUnsupportedTransform:
      return "UnsupportedTransform";
    case ErrorCode::kUnknownColumn:
      return "UnknownColumn";
    case ErrorCode::kDuplicateColumn:
      return "DuplicateColumn";
    case ErrorCode::kDropOfPartitionSource:
      return "DropOfPartitionSource";
    case ErrorCode::kUnknownSnapshot:
      return "UnknownSnapshot";
    case ErrorCode::kCorruptMetadata:
      return "CorruptMetadata";
    case ErrorCode::kUnknownBranch:
      return "UnknownBranch";
    case ErrorCode::kUnknownTable:
      return "UnknownTable";
    case ErrorCode::kTableExists:
      return "TableExists";
    case ErrorCode::kTypeMismatch:
      return "TypeMismatch";
    case ErrorCode::kConflict:
      return "ConflictError";
    case ErrorCode::kRetriesExhausted:
      return "RetriesExhausted";
    case ErrorCode::kTransactionClosed:
      return "TransactionClosed";
    case ErrorCode::kAlreadyInitialized:
      return "AlreadyInitialized";
    case ErrorCode::kRefExists:
      return "RefExists";
    case ErrorCode::kUnknownRef:
      return "UnknownRef";
    case ErrorCode::kCorruptCommit:
      return "CorruptCommit";
    case ErrorCode::kMergeConflict:
      return "MergeConflict";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kNoSnapshotAsOf:
      return "NoSnapshotAsOf";
    case ErrorCode::kNothingToCompact:
      return "NothingToCompact";
    case ErrorCode::kDuplicateSourceKey:
      return "DuplicateSourceKey";
    case ErrorCode::kConfigParseError:
      return "ConfigParseError";
    case ErrorCode::kInjectedFault:
      return "InjectedFault";
  }
  return "Unknown";
}

}  // namespace minilake
