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
#include <string>
#include <string_view>
#include <vector>

#include "minilake/catalog.h"
#include "minilake/value.h"

namespace minilake {

struct Scd2Config {
  std::vector<std::string> key_columns;
  std::vector<std::string> tracked_columns;
  std::string effective_from = "effective_from";  // timestamp
  std::string effective_to = "effective_to";      // timestamp, null while current
  std::string is_current = "is_current";          // bool
};

/// Source rows for a merge: named columns, one Row per record. Must include
/// every key and tracked column and none of the bookkeeping columns. Other
/// dimension columns may be included; they are carried into new versions
/// but do not trigger one.
struct Scd2Source {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

struct Scd2Result {
  std::string commit;  // empty when the merge changed nothing
  std::int64_t inserted = 0;   // new keys plus new versions of changed keys
  std::int64_t closed = 0;
  std::int64_t unchanged = 0;
};

/// Type 2 merge in one transaction. For each source key with a current
/// dimension row: a tracked difference closes that row at `txn_ts` and
/// inserts a new current version; otherwise the row is left alone. Unmatched
/// keys become new current rows. Keys absent from the source are untouched.
/// Throws kDuplicateSourceKey, kSchemaViolation, kUnknownColumn,
/// kInvalidArgument, kConflict.
Scd2Result Scd2Merge(const Catalog& catalog, std::string_view table, std::string_view branch,
                     const Scd2Source& source, const Scd2Config& config, Timestamp txn_ts);

}  // namespace minilake
