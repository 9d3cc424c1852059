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
#include <random>
#include <string>
#include <vector>

#include "minilake/catalog.h"
#include "minilake/schema.h"

namespace minilake::testing {

/// id:int64 (required), ts:timestamp, region:string, amount:float64,
/// day:date, flag:bool.
Schema RandomTableSchema();

/// Rows with clustered-but-random values and roughly 10% nulls in every
/// optional column. `ts` spans six days of July 2023.
std::vector<Row> RandomTableRows(std::mt19937_64& rng, size_t count);

/// Creates `table` on `branch` and appends `rows` in `batches` commits.
void CreateRandomTable(const Catalog& catalog, const std::string& branch,
                       const std::string& table, const std::string& partition,
                       const std::vector<Row>& rows, size_t batches);

/// Appends `rows` in `batches` commits.
void AppendInBatches(const Catalog& catalog, const std::string& branch, const std::string& table,
                     const std::vector<Row>& rows, size_t batches);

/// A conjunction of 1 to 3 atoms whose literals are mostly drawn from `rows`.
std::string RandomPredicateText(const Schema& schema, const std::vector<Row>& rows,
                                std::mt19937_64& rng);

struct PruningCheck {
  bool sound = true;          // no pruned file holds a matching row
  bool matches_oracle = true; // scan output equals the unpruned filter, in order
  std::int64_t live_files = 0;
  std::int64_t pruned_files = 0;
  std::string detail;         // first failure, for diagnostics
};

/// Plans and executes `where` at the branch head and compares it with a
/// brute-force read of every live file.
PruningCheck CheckPruning(const Catalog& catalog, const std::string& branch,
                          const std::string& table, const std::string& where);

}  // namespace minilake::testing
