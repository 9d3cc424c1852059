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

#include "minilake/table_metadata.h"

#include <algorithm>
#include <limits>
#include <set>

#include "minilake/error.h"
#include "util.h"

namespace minilake {

using nlohmann::json;

std::string_view SnapshotOperationName(SnapshotOperation op) {
  switch (op) {
    case SnapshotOperation::kAppend:
      return "APPEND";
    case SnapshotOperation::kDelete:
      return "DELETE";
    case SnapshotOperation::kOverwrite:
      return "OVERWRITE";
    case SnapshotOperation::kReplace:
      return "REPLACE";
    case SnapshotOperation::kRollback:
      return "ROLLBACK";
  }
  return "?";
}

const Schema& TableMetadata::CurrentSchema() const {
  const Schema* schema = SchemaById(current_schema_id);
  if (!schema) Throw(ErrorCode::kCorruptMetadata, "current schema missing");
  return *schema;
}

const PartitionSpec& TableMetadata::CurrentSpec() const {
  const PartitionSpec* spec = SpecById(current_spec_id);
  if (!spec) Throw(ErrorCode::kCorruptMetadata, "current partition spec missing");
  return *spec;
}

const Schema* TableMetadata::SchemaById(std::int32_t id) const {
  for (const auto& schema : schemas) {
    if (schema.schema_id == id) return &schema;
  }
  return nullptr;
}

const PartitionSpec* TableMetadata::SpecById(std::int32_t id) const {
  for (const auto& spec : partition_specs) {
    if (spec.spec_id == id) return &spec;
  }
  return nullptr;
}

const Snapshot* TableMetadata::SnapshotById(std::int64_t id) const {
  for (const auto& snapshot : snapshots) {
    if (snapshot.snapshot_id == id) return &snapshot;
  }
  return nullptr;
}

const Snapshot* TableMetadata::CurrentSnapshot() const {
  return current_snapshot_id ? SnapshotById(*current_snapshot_id) : nullptr;
}

const Field* TableMetadata::FieldInHistory(std::int32_t field_id) const {
  for (auto it = schemas.rbegin(); it != schemas.rend(); ++it) {
    if (const Field* field = it->FindById(field_id)) return field;
  }
  return nullptr;
}

TableMetadata NewTableMetadata(std::string_view name, Schema schema,
                               const std::vector<PartitionFieldDef>& partition) {
  if (!IsIdentifier(name)) {
    Throw(ErrorCode::kInvalidArgument, "bad table name '" + std::string(name) + "'");
  }
  TableMetadata metadata;
  metadata.table_uuid = RandomToken();
  metadata.location = "tables/" + std::string(name);
  schema.schema_id = 0;
  metadata.last_column_id = schema.MaxFieldId();
  metadata.partition_specs.push_back(BindPartitionSpec(0, schema, partition));
  metadata.schemas.push_back(std::move(schema));
  ValidateMetadata(metadata);
  return metadata;
}

TableMetadata EvolveSchema(const TableMetadata& metadata,
                           const std::vector<SchemaChange>& changes) {
  TableMetadata out = metadata;
  Schema schema = metadata.CurrentSchema();
  std::set<std::int32_t> partition_sources;
  for (const auto& field : metadata.CurrentSpec().fields) {
    partition_sources.insert(field.source_field_id);
  }
  for (const auto& change : changes) {
    switch (change.kind) {
      case SchemaChange::Kind::kAdd: {
        if (!IsIdentifier(change.name)) {
          Throw(ErrorCode::kInvalidArgument, "bad column name '" + change.name + "'");
        }
        if (schema.FindByName(change.name)) {
          Throw(ErrorCode::kDuplicateColumn, "column '" + change.name + "' already exists");
        }
        schema.fields.push_back(Field{++out.last_column_id, change.name, change.type, false});
        break;
      }
      case SchemaChange::Kind::kDrop: {
        const Field& field = schema.FieldNamed(change.name);
        if (partition_sources.count(field.id)) {
          Throw(ErrorCode::kDropOfPartitionSource,
                "column '" + change.name + "' is a source of the current partition spec");
        }
        if (schema.fields.size() == 1) {
          Throw(ErrorCode::kInvalidArgument, "cannot drop the last column");
        }
        schema.fields.erase(schema.fields.begin() + schema.IndexOfId(field.id));
        break;
      }
      case SchemaChange::Kind::kRename: {
        int index = schema.IndexOfId(schema.FieldNamed(change.name).id);
        if (!IsIdentifier(change.new_name)) {
          Throw(ErrorCode::kInvalidArgument, "bad column name '" + change.new_name + "'");
        }
        if (change.new_name != change.name && schema.FindByName(change.new_name)) {
          Throw(ErrorCode::kDuplicateColumn, "column '" + change.new_name + "' already exists");
        }
        schema.fields[index].name = change.new_name;
        break;
      }
    }
  }
  std::int32_t next_id = 0;
  for (const auto& s : out.schemas) next_id = std::max(next_id, s.schema_id + 1);
  schema.schema_id = next_id;
  out.current_schema_id = next_id;
  out.schemas.push_back(std::move(schema));
  return out;
}

TableMetadata EvolvePartitionSpec(const TableMetadata& metadata,
                                  const std::vector<PartitionFieldDef>& fields) {
  TableMetadata out = metadata;
  std::int32_t next_id = 0;
  for (const auto& spec : out.partition_specs) next_id = std::max(next_id, spec.spec_id + 1);
  out.partition_specs.push_back(BindPartitionSpec(next_id, metadata.CurrentSchema(), fields));
  out.current_spec_id = next_id;
  return out;
}

namespace {

[[noreturn]] void CorruptMetadata(const std::string& message) {
  Throw(ErrorCode::kCorruptMetadata, message);
}

std::string_view StatusName(EntryStatus status) {
  switch (status) {
    case EntryStatus::kAdded:
      return "ADDED";
    case EntryStatus::kExisting:
      return "EXISTING";
    case EntryStatus::kDeleted:
      return "DELETED";
  }
  return "?";
}

EntryStatus StatusFromName(const std::string& name) {
  for (EntryStatus s : {EntryStatus::kAdded, EntryStatus::kExisting, EntryStatus::kDeleted}) {
    if (StatusName(s) == name) return s;
  }
  CorruptMetadata("unknown entry status '" + name + "'");
}

SnapshotOperation OperationFromName(const std::string& name) {
  for (SnapshotOperation op :
       {SnapshotOperation::kAppend, SnapshotOperation::kDelete, SnapshotOperation::kOverwrite,
        SnapshotOperation::kReplace, SnapshotOperation::kRollback}) {
    if (SnapshotOperationName(op) == name) return op;
  }
  CorruptMetadata("unknown snapshot operation '" + name + "'");
}

json SchemaToJson(const Schema& schema) {
  json fields = json::array();
  for (const auto& f : schema.fields) {
    fields.push_back({{"id", f.id},
                      {"name", f.name},
                      {"required", f.required},
                      {"type", ColumnTypeName(f.type)}});
  }
  return {{"fields", std::move(fields)}, {"schema_id", schema.schema_id}};
}

Schema SchemaFromJson(const json& j) {
  Schema schema;
  schema.schema_id = j.at("schema_id").get<std::int32_t>();
  for (const auto& f : j.at("fields")) {
    auto type = ParseColumnType(f.at("type").get<std::string>());
    if (!type) CorruptMetadata("unknown column type");
    schema.fields.push_back(Field{f.at("id").get<std::int32_t>(), f.at("name").get<std::string>(),
                                  *type, f.at("required").get<bool>()});
  }
  return schema;
}

json SpecToJson(const PartitionSpec& spec) {
  json fields = json::array();
  for (const auto& f : spec.fields) {
    fields.push_back({{"name", f.name},
                      {"source_field_id", f.source_field_id},
                      {"transform", TransformToString(f.transform)}});
  }
  return {{"fields", std::move(fields)}, {"spec_id", spec.spec_id}};
}

PartitionSpec SpecFromJson(const json& j) {
  PartitionSpec spec;
  spec.spec_id = j.at("spec_id").get<std::int32_t>();
  for (const auto& f : j.at("fields")) {
    auto transform = ParseTransformString(f.at("transform").get<std::string>());
    if (!transform) CorruptMetadata("unknown transform");
    spec.fields.push_back(PartitionField{f.at("source_field_id").get<std::int32_t>(), *transform,
                                         f.at("name").get<std::string>()});
  }
  return spec;
}

json StatsToJson(const std::vector<ColumnStats>& stats) {
  json out = json::array();
  for (const auto& s : stats) {
    json entry = {{"field_id", s.field_id}, {"null_count", s.null_count}};
    if (s.min) entry["min"] = *s.min;
    if (s.max) entry["max"] = *s.max;
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<ColumnStats> StatsFromJson(const json& j) {
  std::vector<ColumnStats> out;
  for (const auto& s : j) {
    ColumnStats stats;
    stats.field_id = s.at("field_id").get<std::int32_t>();
    stats.null_count = s.at("null_count").get<std::int64_t>();
    if (s.contains("min")) stats.min = s.at("min").get<std::string>();
    if (s.contains("max")) stats.max = s.at("max").get<std::string>();
    out.push_back(std::move(stats));
  }
  return out;
}

json DataFileToJson(const DataFile& file) {
  json partition = json::array();
  for (const auto& v : file.partition) {
    partition.push_back(IsNull(v) ? json(nullptr) : json(FormatValue(v)));
  }
  return {{"file_size_bytes", file.file_size_bytes},
          {"key", file.key},
          {"partition", std::move(partition)},
          {"record_count", file.record_count},
          {"spec_id", file.spec_id},
          {"stats", StatsToJson(file.stats)}};
}

// Partition values are stored as canonical strings; their types come from
// the partition spec's transforms applied to the source field types.
DataFile DataFileFromJson(const json& j, const TableMetadata& metadata) {
  DataFile file;
  file.key = j.at("key").get<std::string>();
  file.spec_id = j.at("spec_id").get<std::int32_t>();
  file.record_count = j.at("record_count").get<std::int64_t>();
  file.file_size_bytes = j.at("file_size_bytes").get<std::int64_t>();
  file.stats = StatsFromJson(j.at("stats"));
  const PartitionSpec* spec = metadata.SpecById(file.spec_id);
  if (!spec) CorruptMetadata("data file references unknown spec " + std::to_string(file.spec_id));
  const json& partition = j.at("partition");
  if (partition.size() != spec->fields.size()) {
    CorruptMetadata("partition tuple length differs from spec");
  }
  for (size_t i = 0; i < spec->fields.size(); ++i) {
    if (partition[i].is_null()) {
      file.partition.emplace_back();
      continue;
    }
    const Field* source = metadata.FieldInHistory(spec->fields[i].source_field_id);
    if (!source) CorruptMetadata("partition source field missing");
    ColumnType type = TransformResultType(spec->fields[i].transform, source->type);
    auto value = ParseValue(type, partition[i].get<std::string>());
    if (!value) CorruptMetadata("bad partition value in " + file.key);
    file.partition.push_back(std::move(*value));
  }
  return file;
}

json SnapshotToJson(const Snapshot& s) {
  json j = {{"manifest_keys", s.manifest_keys},
            {"operation", SnapshotOperationName(s.operation)},
            {"parent_id", s.parent_id ? json(*s.parent_id) : json(nullptr)},
            {"snapshot_id", s.snapshot_id},
            {"summary",
             {{"added_files", s.summary.added_files},
              {"added_rows", s.summary.added_rows},
              {"deleted_files", s.summary.deleted_files},
              {"deleted_rows", s.summary.deleted_rows}}},
            {"timestamp_ms", s.timestamp_ms}};
  return j;
}

Snapshot SnapshotFromJson(const json& j) {
  Snapshot s;
  s.snapshot_id = j.at("snapshot_id").get<std::int64_t>();
  if (!j.at("parent_id").is_null()) s.parent_id = j.at("parent_id").get<std::int64_t>();
  s.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
  s.operation = OperationFromName(j.at("operation").get<std::string>());
  s.manifest_keys = j.at("manifest_keys").get<std::vector<std::string>>();
  const json& summary = j.at("summary");
  s.summary.added_files = summary.at("added_files").get<std::int64_t>();
  s.summary.added_rows = summary.at("added_rows").get<std::int64_t>();
  s.summary.deleted_files = summary.at("deleted_files").get<std::int64_t>();
  s.summary.deleted_rows = summary.at("deleted_rows").get<std::int64_t>();
  return s;
}

}  // namespace

void ValidateMetadata(const TableMetadata& m) {
  if (m.format_version != 1) CorruptMetadata("unsupported format_version");
  if (m.table_uuid.empty() || m.location.empty()) CorruptMetadata("missing uuid or location");
  if (m.schemas.empty() || !m.SchemaById(m.current_schema_id)) {
    CorruptMetadata("dangling current_schema_id");
  }
  std::set<std::int32_t> schema_ids;
  for (const auto& schema : m.schemas) {
    if (!schema_ids.insert(schema.schema_id).second) CorruptMetadata("duplicate schema id");
    std::set<std::string> names;
    for (const auto& field : schema.fields) {
      if (field.id <= 0 || field.id > m.last_column_id) {
        CorruptMetadata("field id exceeds last_column_id");
      }
      if (!names.insert(field.name).second) CorruptMetadata("duplicate field name in schema");
    }
  }
  if (m.partition_specs.empty() || !m.SpecById(m.current_spec_id)) {
    CorruptMetadata("dangling current_spec_id");
  }
  std::set<std::int32_t> spec_ids;
  for (const auto& spec : m.partition_specs) {
    if (!spec_ids.insert(spec.spec_id).second) CorruptMetadata("duplicate spec id");
    for (const auto& field : spec.fields) {
      const Field* source = m.FieldInHistory(field.source_field_id);
      if (!source || !TransformSupports(field.transform, source->type)) {
        CorruptMetadata("partition field '" + field.name + "' has an invalid source");
      }
    }
  }
  std::set<std::int64_t> snapshot_ids;
  for (const auto& snapshot : m.snapshots) {
    if (snapshot.snapshot_id <= 0 || snapshot.snapshot_id > m.last_snapshot_id) {
      CorruptMetadata("snapshot id out of range");
    }
    if (!snapshot_ids.insert(snapshot.snapshot_id).second) CorruptMetadata("duplicate snapshot");
    if (snapshot.parent_id && *snapshot.parent_id >= snapshot.snapshot_id) {
      CorruptMetadata("snapshot parent is not older than its child");
    }
  }
  if (m.current_snapshot_id && !snapshot_ids.count(*m.current_snapshot_id)) {
    CorruptMetadata("dangling current_snapshot_id");
  }
  std::int64_t last_ts = std::numeric_limits<std::int64_t>::min();
  for (const auto& entry : m.snapshot_log) {
    if (!snapshot_ids.count(entry.snapshot_id)) CorruptMetadata("snapshot_log references unknown snapshot");
    if (entry.timestamp_ms < last_ts) CorruptMetadata("snapshot_log not chronological");
    last_ts = entry.timestamp_ms;
  }
}

std::string EncodeMetadata(const TableMetadata& m) {
  json schemas = json::array();
  for (const auto& s : m.schemas) schemas.push_back(SchemaToJson(s));
  json specs = json::array();
  for (const auto& s : m.partition_specs) specs.push_back(SpecToJson(s));
  json snapshots = json::array();
  for (const auto& s : m.snapshots) snapshots.push_back(SnapshotToJson(s));
  json log = json::array();
  for (const auto& e : m.snapshot_log) {
    log.push_back({{"snapshot_id", e.snapshot_id}, {"timestamp_ms", e.timestamp_ms}});
  }
  json doc = {
      {"current_schema_id", m.current_schema_id},
      {"current_snapshot_id",
       m.current_snapshot_id ? json(*m.current_snapshot_id) : json(nullptr)},
      {"current_spec_id", m.current_spec_id},
      {"format_version", m.format_version},
      {"last_column_id", m.last_column_id},
      {"last_snapshot_id", m.last_snapshot_id},
      {"location", m.location},
      {"partition_specs", std::move(specs)},
      {"properties", m.properties},
      {"schemas", std::move(schemas)},
      {"snapshot_log", std::move(log)},
      {"snapshots", std::move(snapshots)},
      {"table_uuid", m.table_uuid},
  };
  return CanonicalDump(doc);
}

TableMetadata DecodeMetadata(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) CorruptMetadata("metadata is not a JSON object");
  TableMetadata m;
  try {
    m.table_uuid = doc.at("table_uuid").get<std::string>();
    m.format_version = doc.at("format_version").get<std::int32_t>();
    m.location = doc.at("location").get<std::string>();
    m.last_column_id = doc.at("last_column_id").get<std::int32_t>();
    for (const auto& s : doc.at("schemas")) m.schemas.push_back(SchemaFromJson(s));
    m.current_schema_id = doc.at("current_schema_id").get<std::int32_t>();
    for (const auto& s : doc.at("partition_specs")) m.partition_specs.push_back(SpecFromJson(s));
    m.current_spec_id = doc.at("current_spec_id").get<std::int32_t>();
    m.last_snapshot_id = doc.at("last_snapshot_id").get<std::int64_t>();
    for (const auto& s : doc.at("snapshots")) m.snapshots.push_back(SnapshotFromJson(s));
    if (!doc.at("current_snapshot_id").is_null()) {
      m.current_snapshot_id = doc.at("current_snapshot_id").get<std::int64_t>();
    }
    for (const auto& e : doc.at("snapshot_log")) {
      m.snapshot_log.push_back(
          {e.at("snapshot_id").get<std::int64_t>(), e.at("timestamp_ms").get<std::int64_t>()});
    }
    m.properties = doc.at("properties").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    CorruptMetadata(std::string("malformed metadata: ") + e.what());
  }
  ValidateMetadata(m);
  return m;
}

std::string StoreMetadata(const ObjectStore& store, const TableMetadata& metadata) {
  ValidateMetadata(metadata);
  std::string key = metadata.location + "/metadata/" + RandomToken() + ".metadata.json";
  store.Put(key, EncodeMetadata(metadata));
  return key;
}

TableMetadata LoadMetadata(const ObjectStore& store, std::string_view key) {
  return DecodeMetadata(store.Get(key));
}

std::string WriteManifest(const ObjectStore& store, const TableMetadata& metadata,
                          const std::vector<ManifestEntry>& entries) {
  json list = json::array();
  for (const auto& entry : entries) {
    list.push_back({{"data_file", DataFileToJson(entry.data_file)},
                    {"status", StatusName(entry.status)}});
  }
  std::string key = metadata.location + "/metadata/manifest-" + RandomToken() + ".json";
  store.Put(key, CanonicalDump(json{{"entries", std::move(list)}}));
  return key;
}

std::vector<ManifestEntry> ReadManifest(const ObjectStore& store, const TableMetadata& metadata,
                                        std::string_view key) {
  json doc = json::parse(store.Get(key), nullptr, false);
  if (doc.is_discarded()) CorruptMetadata("manifest is not JSON: " + std::string(key));
  std::vector<ManifestEntry> entries;
  try {
    for (const auto& e : doc.at("entries")) {
      entries.push_back(ManifestEntry{StatusFromName(e.at("status").get<std::string>()),
                                      DataFileFromJson(e.at("data_file"), metadata)});
    }
  } catch (const json::exception& e) {
    CorruptMetadata(std::string("malformed manifest: ") + e.what());
  }
  return entries;
}

std::vector<DataFile> LiveFiles(const ObjectStore& store, const TableMetadata& metadata,
                                std::int64_t snapshot_id) {
  const Snapshot* snapshot = metadata.SnapshotById(snapshot_id);
  if (!snapshot) Throw(ErrorCode::kUnknownSnapshot, "unknown snapshot " + std::to_string(snapshot_id));
  std::map<std::string, DataFile> live;
  std::set<std::string> deleted;
  for (const auto& key : snapshot->manifest_keys) {
    for (auto& entry : ReadManifest(store, metadata, key)) {
      if (entry.status == EntryStatus::kDeleted) {
        deleted.insert(entry.data_file.key);
        continue;
      }
      std::string file_key = entry.data_file.key;
      if (!live.emplace(file_key, std::move(entry.data_file)).second) {
        CorruptMetadata("file listed twice in snapshot: " + file_key);
      }
    }
  }
  std::vector<DataFile> out;
  out.reserve(live.size());
  for (auto& [key, file] : live) {
    if (!deleted.count(key)) out.push_back(std::move(file));
  }
  return out;
}

std::vector<DataFile> CurrentLiveFiles(const ObjectStore& store, const TableMetadata& metadata) {
  if (!metadata.current_snapshot_id) return {};
  return LiveFiles(store, metadata, *metadata.current_snapshot_id);
}

}  // namespace minilake
