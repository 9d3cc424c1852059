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

#include "minilake/scd.h"

#include <algorithm>
#include <map>
#include <set>

#include "minilake/error.h"
#include "minilake/scan.h"
#include "minilake/transaction.h"

namespace minilake {

namespace {

using Key = std::vector<Value>;

size_t RequireColumn(const Schema& schema, std::string_view name, std::optional<ColumnType> type) {
  const int index = schema.IndexOfName(name);
  if (index < 0) Throw(ErrorCode::kUnknownColumn, "unknown column '" + std::string(name) + "'");
  const Field& field = schema.fields[static_cast<size_t>(index)];
  if (type && field.type != *type) {
    Throw(ErrorCode::kSchemaViolation, "column " + field.name + " must have type " +
                                           std::string(ColumnTypeName(*type)));
  }
  return static_cast<size_t>(index);
}

Key KeyOf(const Row& row, const std::vector<size_t>& positions) {
  Key key;
  for (size_t p : positions) key.push_back(row[p]);
  return key;
}

}  // namespace

Scd2Result Scd2Merge(const Catalog& catalog, std::string_view table, std::string_view branch,
                     const Scd2Source& source, const Scd2Config& config, Timestamp txn_ts) {
  if (config.key_columns.empty()) Throw(ErrorCode::kInvalidArgument, "no key columns");
  for (const auto& k : config.key_columns) {
    if (std::count(config.tracked_columns.begin(), config.tracked_columns.end(), k)) {
      Throw(ErrorCode::kInvalidArgument, "column " + k + " is both key and tracked");
    }
  }
  Transaction tx(catalog, std::string(branch));
  const Schema schema = tx.Metadata(table).CurrentSchema();
  const size_t from_pos = RequireColumn(schema, config.effective_from, ColumnType::kTimestamp);
  const size_t to_pos = RequireColumn(schema, config.effective_to, ColumnType::kTimestamp);
  const size_t current_pos = RequireColumn(schema, config.is_current, ColumnType::kBool);
  const std::set<size_t> bookkeeping{from_pos, to_pos, current_pos};
  if (bookkeeping.size() != 3) {
    Throw(ErrorCode::kSchemaViolation, "bookkeeping columns must be distinct");
  }

  // Position in the dimension schema of each source column.
  std::vector<size_t> source_to_dim;
  for (const auto& name : source.columns) {
    const size_t pos = RequireColumn(schema, name, std::nullopt);
    if (bookkeeping.count(pos)) {
      Throw(ErrorCode::kSchemaViolation, "source must not carry bookkeeping column " + name);
    }
    if (std::count(source_to_dim.begin(), source_to_dim.end(), pos)) {
      Throw(ErrorCode::kDuplicateColumn, "source column " + name + " repeated");
    }
    source_to_dim.push_back(pos);
  }
  auto positions_of = [&](const std::vector<std::string>& names) {
    std::vector<size_t> out;
    for (const auto& name : names) {
      const size_t pos = RequireColumn(schema, name, std::nullopt);
      if (!std::count(source_to_dim.begin(), source_to_dim.end(), pos)) {
        Throw(ErrorCode::kSchemaViolation, "source lacks column " + name);
      }
      out.push_back(pos);
    }
    return out;
  };
  const std::vector<size_t> key_pos = positions_of(config.key_columns);
  const std::vector<size_t> tracked_pos = positions_of(config.tracked_columns);

  // Source rows widened to the dimension schema; non-source cells stay null.
  std::map<Key, Row> incoming;
  std::vector<Key> order;
  for (const auto& src : source.rows) {
    if (src.size() != source.columns.size()) {
      Throw(ErrorCode::kSchemaViolation, "source row has " + std::to_string(src.size()) +
                                             " values, expected " +
                                             std::to_string(source.columns.size()));
    }
    Row row(schema.fields.size());
    for (size_t i = 0; i < src.size(); ++i) row[source_to_dim[i]] = src[i];
    Key key = KeyOf(row, key_pos);
    if (std::any_of(key.begin(), key.end(), [](const Value& v) { return IsNull(v); })) {
      Throw(ErrorCode::kSchemaViolation, "source row has a null key");
    }
    if (!incoming.emplace(key, std::move(row)).second) {
      std::string text;
      for (const auto& v : key) text += (text.empty() ? "" : ",") + FormatValue(v);
      Throw(ErrorCode::kDuplicateSourceKey, "source key (" + text + ") appears more than once");
    }
    order.push_back(std::move(key));
  }

  // Find the current version of every incoming key.
  Predicate current_only;
  {
    Atom atom;
    atom.kind = Atom::Kind::kCompare;
    atom.column = schema.fields[current_pos].name;
    atom.field_id = schema.fields[current_pos].id;
    atom.type = ColumnType::kBool;
    atom.op = CompareOp::kEq;
    atom.literal = true;
    current_only.atoms.push_back(std::move(atom));
  }
  const auto all_columns = ResolveProjection(schema, {});
  std::map<Key, Row> current;
  for (const auto& file : tx.LiveFiles(table)) {
    if (!FileMayMatch(tx.Metadata(table), file, current_only)) continue;
    for (auto& row : ReadDataFile(catalog.store(), file.key, schema, all_columns)) {
      if (!EvaluatePredicate(current_only, schema, row)) continue;
      Key key = KeyOf(row, key_pos);
      if (incoming.count(key)) current[std::move(key)] = std::move(row);
    }
  }

  Scd2Result result;
  std::set<Key> to_close;
  std::vector<Row> new_rows;
  for (const auto& key : order) {
    const Row& src = incoming.at(key);
    const auto it = current.find(key);
    Row version;
    if (it == current.end()) {
      version = src;
    } else {
      const Row& existing = it->second;
      const bool changed = std::any_of(tracked_pos.begin(), tracked_pos.end(),
                                       [&](size_t p) { return existing[p] != src[p]; });
      if (!changed) {
        ++result.unchanged;
        continue;
      }
      const auto* from = std::get_if<Timestamp>(&existing[from_pos]);
      if (from && txn_ts < *from) {
        Throw(ErrorCode::kInvalidArgument, "merge timestamp precedes the current version's start");
      }
      version = existing;
      for (size_t p : source_to_dim) version[p] = src[p];
      to_close.insert(key);
      ++result.closed;
    }
    version[from_pos] = txn_ts;
    version[to_pos] = std::monostate{};
    version[current_pos] = true;
    new_rows.push_back(std::move(version));
    ++result.inserted;
  }
  if (new_rows.empty()) return result;

  tx.Rewrite(
      table, ChangeKind::kOverwrite, current_only,
      [&](const Row& row) -> std::optional<Row> {
        const auto* flag = std::get_if<bool>(&row[current_pos]);
        if (!flag || !*flag || !to_close.count(KeyOf(row, key_pos))) return row;
        Row closed = row;
        closed[to_pos] = txn_ts;
        closed[current_pos] = false;
        return closed;
      },
      new_rows);
  result.commit = tx.Commit("minilake", "scd2 merge into " + std::string(table));
  return result;
}

}  // namespace minilake
