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

#include "random_table.h"

#include <set>

#include "minilake/columnar_file.h"
#include "minilake/predicate.h"
#include "minilake/scan.h"
#include "minilake/transaction.h"
#include "test_util.h"

namespace minilake::testing {

Schema RandomTableSchema() {
  return ParseSchemaText(
      "id:int64:required,ts:timestamp,region:string,amount:float64,day:date,flag:bool");
}

std::vector<Row> RandomTableRows(std::mt19937_64& rng, size_t count) {
  static const char* kRegions[] = {"eu", "us", "apac", "latam", "mena"};
  const std::int64_t base_ts = OracleMicros(2023, 7, 10, 0, 0, 0);
  const std::int64_t base_day = OracleDaysFromCivil(2023, 1, 1);
  auto null_roll = [&] { return rng() % 10 == 0; };
  std::vector<Row> rows;
  rows.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Row row(6);
    row[0] = static_cast<std::int64_t>(rng() % 500);
    if (!null_roll()) {
      row[1] = Timestamp{base_ts + static_cast<std::int64_t>(rng() % (6 * kMicrosPerDay))};
    }
    if (!null_roll()) row[2] = std::string(kRegions[rng() % 5]);
    if (!null_roll()) row[3] = static_cast<double>(static_cast<std::int64_t>(rng() % 200000) - 10000) / 100.0;
    if (!null_roll()) row[4] = Date{static_cast<std::int32_t>(base_day + static_cast<std::int64_t>(rng() % 365))};
    if (!null_roll()) row[5] = static_cast<bool>(rng() & 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

void AppendInBatches(const Catalog& catalog, const std::string& branch, const std::string& table,
                     const std::vector<Row>& rows, size_t batches) {
  const size_t per_batch = (rows.size() + batches - 1) / batches;
  for (size_t start = 0; start < rows.size(); start += per_batch) {
    const size_t end = std::min(rows.size(), start + per_batch);
    Transaction tx(catalog, branch);
    tx.Append(table, std::vector<Row>(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                      rows.begin() + static_cast<std::ptrdiff_t>(end)));
    tx.Commit("test", "batch");
  }
}

void CreateRandomTable(const Catalog& catalog, const std::string& branch,
                       const std::string& table, const std::string& partition,
                       const std::vector<Row>& rows, size_t batches) {
  {
    Transaction tx(catalog, branch);
    tx.CreateTable(table, RandomTableSchema(), ParsePartitionText(partition));
    tx.Commit("test", "create");
  }
  AppendInBatches(catalog, branch, table, rows, batches);
}

std::string RandomPredicateText(const Schema& schema, const std::vector<Row>& rows,
                                std::mt19937_64& rng) {
  static const char* kOps[] = {"=", "!=", "<", "<=", ">", ">="};
  std::string text;
  const size_t atoms = 1 + rng() % 3;
  for (size_t a = 0; a < atoms; ++a) {
    if (!text.empty()) text += " AND ";
    const size_t col = rng() % schema.fields.size();
    const Field& field = schema.fields[col];
    const unsigned roll = static_cast<unsigned>(rng() % 20);
    if (roll == 0) {
      text += field.name + " IS NULL";
      continue;
    }
    if (roll == 1) {
      text += field.name + " IS NOT NULL";
      continue;
    }
    Value literal = rows[rng() % rows.size()][col];
    for (int tries = 0; IsNull(literal) && tries < 10; ++tries) {
      literal = rows[rng() % rows.size()][col];
    }
    if (IsNull(literal)) {
      text += field.name + " IS NULL";
      continue;
    }
    // Occasionally nudge the literal off the data.
    if (roll == 2) {
      if (auto* i = std::get_if<std::int64_t>(&literal)) *i += 1000;
      if (auto* t = std::get_if<Timestamp>(&literal)) t->micros -= 30 * kMicrosPerDay;
    }
    const char* op = kOps[rng() % 6];
    if (field.type == ColumnType::kBool && rng() % 2) op = "=";
    text += field.name + " " + op + " " + LiteralToString(literal);
  }
  return text;
}

PruningCheck CheckPruning(const Catalog& catalog, const std::string& branch,
                          const std::string& table, const std::string& where) {
  PruningCheck check;
  const ResolvedSnapshot resolved =
      ResolveSnapshot(catalog, table, SnapshotSelector::Head(), branch);
  const TableMetadata& metadata = resolved.metadata;
  const Schema& schema = metadata.CurrentSchema();
  const Predicate predicate = ParsePredicate(where, schema);
  const auto all = ResolveProjection(schema, {});

  std::vector<Row> oracle;
  std::set<std::string> files_with_matches;
  const auto live = resolved.snapshot_id
                        ? LiveFiles(catalog.store(), metadata, *resolved.snapshot_id)
                        : std::vector<DataFile>{};
  for (const auto& file : live) {
    for (auto& row : ReadDataFile(catalog.store(), file.key, schema, all)) {
      if (!EvaluatePredicate(predicate, schema, row)) continue;
      files_with_matches.insert(file.key);
      oracle.push_back(std::move(row));
    }
  }

  const ScanPlan plan =
      PlanScan(catalog.store(), metadata, resolved.snapshot_id, predicate, all);
  std::set<std::string> kept;
  for (const auto& task : plan.tasks) kept.insert(task.data_file.key);
  check.live_files = plan.live_file_count;
  check.pruned_files = plan.live_file_count - static_cast<std::int64_t>(plan.tasks.size());
  for (const auto& key : files_with_matches) {
    if (!kept.count(key)) {
      check.sound = false;
      check.detail = "pruned " + key + " which matches '" + where + "'";
      break;
    }
  }
  const std::vector<Row> scanned = ExecuteScan(catalog.store(), plan.tasks, predicate);
  if (scanned != oracle) {
    check.matches_oracle = false;
    if (check.detail.empty()) {
      check.detail = "scan returned " + std::to_string(scanned.size()) + " rows, oracle " +
                     std::to_string(oracle.size()) + " for '" + where + "'";
    }
  }
  return check;
}

}  // namespace minilake::testing
