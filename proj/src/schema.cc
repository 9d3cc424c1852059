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

#include "minilake/schema.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "minilake/error.h"
#include "util.h"

namespace minilake {

const Field* Schema::FindByName(std::string_view name) const {
  for (const auto& field : fields) {
    if (field.name == name) return &field;
  }
  return nullptr;
}

const Field* Schema::FindById(std::int32_t id) const {
  for (const auto& field : fields) {
    if (field.id == id) return &field;
  }
  return nullptr;
}

int Schema::IndexOfId(std::int32_t id) const {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int Schema::IndexOfName(std::string_view name) const {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const Field& Schema::FieldNamed(std::string_view name) const {
  const Field* field = FindByName(name);
  if (!field) Throw(ErrorCode::kUnknownColumn, "unknown column '" + std::string(name) + "'");
  return *field;
}

std::int32_t Schema::MaxFieldId() const {
  std::int32_t max_id = 0;
  for (const auto& field : fields) max_id = std::max(max_id, field.id);
  return max_id;
}

bool IsIdentifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(name[0])) return false;
  return std::all_of(name.begin(), name.end(),
                     [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

Schema ParseSchemaText(std::string_view text) {
  Schema schema;
  std::set<std::string> seen;
  for (std::string_view item : SplitTopLevel(text, ',')) {
    item = Trim(item);
    auto parts = SplitTopLevel(item, ':');
    if (parts.size() < 2 || parts.size() > 3) {
      Throw(ErrorCode::kInvalidArgument, "bad column spec '" + std::string(item) +
                                             "', expected name:type[:required]");
    }
    Field field;
    field.id = static_cast<std::int32_t>(schema.fields.size()) + 1;
    field.name = std::string(Trim(parts[0]));
    if (!IsIdentifier(field.name)) {
      Throw(ErrorCode::kInvalidArgument, "bad column name '" + field.name + "'");
    }
    auto type = ParseColumnType(Trim(parts[1]));
    if (!type) Throw(ErrorCode::kInvalidArgument, "unknown type '" + std::string(parts[1]) + "'");
    field.type = *type;
    if (parts.size() == 3) {
      if (Trim(parts[2]) != "required") {
        Throw(ErrorCode::kInvalidArgument, "expected 'required', got '" + std::string(parts[2]) + "'");
      }
      field.required = true;
    }
    if (!seen.insert(field.name).second) {
      Throw(ErrorCode::kDuplicateColumn, "duplicate column '" + field.name + "'");
    }
    schema.fields.push_back(std::move(field));
  }
  if (schema.fields.empty()) Throw(ErrorCode::kInvalidArgument, "schema has no columns");
  return schema;
}

void ValidateRow(const Schema& schema, const Row& row) {
  if (row.size() != schema.fields.size()) {
    Throw(ErrorCode::kSchemaViolation, "row has " + std::to_string(row.size()) +
                                           " values, schema has " +
                                           std::to_string(schema.fields.size()) + " columns");
  }
  for (size_t i = 0; i < row.size(); ++i) {
    const Field& field = schema.fields[i];
    const Value& value = row[i];
    if (IsNull(value)) {
      if (field.required) {
        Throw(ErrorCode::kSchemaViolation, "null in required column '" + field.name + "'");
      }
      continue;
    }
    if (!ValueMatchesType(value, field.type)) {
      Throw(ErrorCode::kSchemaViolation, "column '" + field.name + "' expects " +
                                             std::string(ColumnTypeName(field.type)));
    }
    if (field.type == ColumnType::kFloat64 && !std::isfinite(std::get<double>(value))) {
      Throw(ErrorCode::kSchemaViolation, "non-finite float in column '" + field.name + "'");
    }
    if (field.type == ColumnType::kString && !IsValidUtf8(std::get<std::string>(value))) {
      Throw(ErrorCode::kSchemaViolation, "invalid UTF-8 in column '" + field.name + "'");
    }
  }
}

}  // namespace minilake
