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

#include "minilake/scan.h"

#include <algorithm>
#include <set>

#include "minilake/error.h"

namespace minilake {

ResolvedSnapshot ResolveSnapshot(const Catalog& catalog, std::string_view table,
                                 const SnapshotSelector& selector, std::string_view branch) {
  if (selector.kind == SnapshotSelector::Kind::kAtCommit) {
    const CatalogCommit commit = catalog.Resolve(selector.commit);
    TableMetadata metadata = catalog.LookupTable(commit, table);
    auto id = metadata.current_snapshot_id;
    return {std::move(metadata), id};
  }
  const CatalogCommit head = catalog.LoadCommit(catalog.BranchHead(branch));
  ResolvedSnapshot out{catalog.LookupTable(head, table), std::nullopt};
  switch (selector.kind) {
    case SnapshotSelector::Kind::kHead:
      out.snapshot_id = out.metadata.current_snapshot_id;
      break;
    case SnapshotSelector::Kind::kAtSnapshot:
      if (!out.metadata.SnapshotById(selector.snapshot_id)) {
        Throw(ErrorCode::kUnknownSnapshot,
              "table " + std::string(table) + " has no snapshot " +
                  std::to_string(selector.snapshot_id));
      }
      out.snapshot_id = selector.snapshot_id;
      break;
    case SnapshotSelector::Kind::kAsOf: {
      const auto& log = out.metadata.snapshot_log;
      const auto it = std::find_if(log.rbegin(), log.rend(), [&](const SnapshotLogEntry& e) {
        return e.timestamp_ms <= selector.timestamp_ms;
      });
      if (it == log.rend()) {
        Throw(ErrorCode::kNoSnapshotAsOf, "table " + std::string(table) + " has no snapshot as of " +
                                              std::to_string(selector.timestamp_ms));
      }
      out.snapshot_id = it->snapshot_id;
      break;
    }
    case SnapshotSelector::Kind::kAtCommit:
      break;
  }
  return out;
}

namespace {

// True when the file's partition value refutes the atom.
bool PartitionRefutes(const PartitionField& field, const Value& partition, const Atom& atom) {
  if (atom.kind == Atom::Kind::kIsNotNull) return IsNull(partition);
  if (atom.kind == Atom::Kind::kIsNull) {
    return field.transform.kind == Transform::Kind::kIdentity && !IsNull(partition);
  }
  if (IsNull(partition)) return true;
  if (atom.op == CompareOp::kNe) return false;
  const Value projected = ApplyTransform(field.transform, atom.literal);
  if (!field.transform.IsMonotone()) {
    return atom.op == CompareOp::kEq && CompareValues(partition, projected) != 0;
  }
  const auto order = CompareValues(partition, projected);
  switch (atom.op) {
    case CompareOp::kEq:
      return order != 0;
    case CompareOp::kLt:
    case CompareOp::kLe:
      return order > 0;
    case CompareOp::kGt:
    case CompareOp::kGe:
      return order < 0;
    case CompareOp::kNe:
      break;
  }
  return false;
}

// True when column statistics refute the atom.
bool StatsRefute(const DataFile& file, const Atom& atom) {
  const ColumnStats* stats = file.StatsFor(atom.field_id);
  // A column absent from the file reads as all nulls.
  const std::int64_t null_count = stats ? stats->null_count : file.record_count;
  switch (atom.kind) {
    case Atom::Kind::kIsNull:
      return null_count == 0;
    case Atom::Kind::kIsNotNull:
      return null_count == file.record_count;
    case Atom::Kind::kCompare:
      break;
  }
  if (!stats || !stats->min || !stats->max) return true;
  const auto min = ParseValue(atom.type, *stats->min);
  const auto max = ParseValue(atom.type, *stats->max);
  if (!min || !max) return false;
  const auto vs_min = CompareValues(atom.literal, *min);
  const auto vs_max = CompareValues(atom.literal, *max);
  switch (atom.op) {
    case CompareOp::kEq:
      return vs_min < 0 || vs_max > 0;
    case CompareOp::kNe:
      return vs_min == 0 && vs_max == 0;
    case CompareOp::kLt:
      return vs_min <= 0;
    case CompareOp::kLe:
      return vs_min < 0;
    case CompareOp::kGt:
      return vs_max >= 0;
    case CompareOp::kGe:
      return vs_max > 0;
  }
  return false;
}

}  // namespace

bool FileMayMatch(const TableMetadata& metadata, const DataFile& file, const Predicate& predicate) {
  const PartitionSpec* spec = metadata.SpecById(file.spec_id);
  for (const auto& atom : predicate.atoms) {
    if (spec && spec->fields.size() == file.partition.size()) {
      for (size_t i = 0; i < spec->fields.size(); ++i) {
        if (spec->fields[i].source_field_id == atom.field_id &&
            PartitionRefutes(spec->fields[i], file.partition[i], atom)) {
          return false;
        }
      }
    }
    if (StatsRefute(file, atom)) return false;
  }
  return true;
}

std::vector<std::int32_t> ResolveProjection(const Schema& schema,
                                            const std::vector<std::string>& columns) {
  std::vector<std::int32_t> ids;
  if (columns.empty()) {
    for (const auto& f : schema.fields) ids.push_back(f.id);
    return ids;
  }
  for (const auto& name : columns) ids.push_back(schema.FieldNamed(name).id);
  return ids;
}

ScanPlan PlanScan(const ObjectStore& store, const TableMetadata& metadata,
                  std::optional<std::int64_t> snapshot_id, const Predicate& predicate,
                  const std::vector<std::int32_t>& projection) {
  ScanPlan plan;
  if (!snapshot_id) return plan;
  const Schema& schema = metadata.CurrentSchema();
  for (auto& file : LiveFiles(store, metadata, *snapshot_id)) {
    ++plan.live_file_count;
    if (!FileMayMatch(metadata, file, predicate)) continue;
    plan.tasks.push_back({std::move(file), schema, projection});
  }
  return plan;
}

std::vector<Row> ExecuteScan(const ObjectStore& store, const std::vector<ScanTask>& tasks,
                             const Predicate& predicate) {
  std::vector<Row> out;
  for (const auto& task : tasks) {
    // Read the projection followed by any predicate-only columns.
    std::vector<std::int32_t> ids = task.projection;
    std::vector<size_t> atom_index;
    for (const auto& atom : predicate.atoms) {
      auto it = std::find(ids.begin(), ids.end(), atom.field_id);
      if (it == ids.end()) it = ids.insert(ids.end(), atom.field_id);
      atom_index.push_back(static_cast<size_t>(it - ids.begin()));
    }
    for (auto& row : ReadDataFile(store, task.data_file.key, task.read_schema, ids)) {
      bool keep = true;
      for (size_t a = 0; a < predicate.atoms.size() && keep; ++a) {
        keep = EvaluateAtom(predicate.atoms[a], row[atom_index[a]]);
      }
      if (!keep) continue;
      row.resize(task.projection.size());
      out.push_back(std::move(row));
    }
  }
  return out;
}

ScanResult ScanTable(const Catalog& catalog, std::string_view table, std::string_view branch,
                     const SnapshotSelector& selector, std::string_view where,
                     const std::vector<std::string>& columns) {
  const ResolvedSnapshot resolved = ResolveSnapshot(catalog, table, selector, branch);
  const Schema& schema = resolved.metadata.CurrentSchema();
  const Predicate predicate = ParsePredicate(where, schema);
  const auto projection = ResolveProjection(schema, columns);
  const ScanPlan plan =
      PlanScan(catalog.store(), resolved.metadata, resolved.snapshot_id, predicate, projection);
  ScanResult result;
  for (auto id : projection) result.columns.push_back(schema.FindById(id)->name);
  result.rows = ExecuteScan(catalog.store(), plan.tasks, predicate);
  result.files_scanned = static_cast<std::int64_t>(plan.tasks.size());
  result.files_pruned = plan.live_file_count - result.files_scanned;
  return result;
}

std::vector<Value> CheckReferentialIntegrity(const Catalog& catalog, std::string_view fact,
                                             std::string_view fk, std::string_view dim,
                                             std::string_view key, std::string_view branch) {
  const auto fact_snapshot = ResolveSnapshot(catalog, fact, SnapshotSelector::Head(), branch);
  const auto dim_snapshot = ResolveSnapshot(catalog, dim, SnapshotSelector::Head(), branch);
  const Field& fk_field = fact_snapshot.metadata.CurrentSchema().FieldNamed(fk);
  const Field& key_field = dim_snapshot.metadata.CurrentSchema().FieldNamed(key);
  if (fk_field.type != key_field.type) {
    Throw(ErrorCode::kTypeMismatch, std::string(fact) + "." + fk_field.name + " is " +
                                        std::string(ColumnTypeName(fk_field.type)) + " but " +
                                        std::string(dim) + "." + key_field.name + " is " +
                                        std::string(ColumnTypeName(key_field.type)));
  }
  auto column_values = [&](const ResolvedSnapshot& snapshot, std::int32_t field_id) {
    Predicate not_null;
    Atom atom;
    atom.kind = Atom::Kind::kIsNotNull;
    atom.field_id = field_id;
    not_null.atoms.push_back(atom);
    const auto plan =
        PlanScan(catalog.store(), snapshot.metadata, snapshot.snapshot_id, not_null, {field_id});
    std::set<Value> values;
    for (auto& row : ExecuteScan(catalog.store(), plan.tasks, not_null)) {
      values.insert(std::move(row[0]));
    }
    return values;
  };
  const auto keys = column_values(dim_snapshot, key_field.id);
  std::vector<Value> orphans;
  for (auto& v : column_values(fact_snapshot, fk_field.id)) {
    if (!keys.count(v)) orphans.push_back(v);
  }
  return orphans;
}

}  // namespace minilake
