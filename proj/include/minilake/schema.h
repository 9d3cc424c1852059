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

#include "minilake/value.h"

namespace minilake {

struct Field {
  std::int32_t id = 0;
  std::string name;
  ColumnType type = ColumnType::kInt64;
  bool required = false;

  bool operator==(const Field&) const = default;
};

/// An ordered, field-id addressed list of columns. Ids are stable across
/// renames and never reused after a drop.
struct Schema {
  std::int32_t schema_id = 0;
  std::vector<Field> fields;

  bool operator==(const Schema&) const = default;

  const Field* FindByName(std::string_view name) const;
  const Field* FindById(std::int32_t id) const;
  /// Position of the field in `fields`, or -1.
  int IndexOfId(std::int32_t id) const;
  int IndexOfName(std::string_view name) const;
  /// Throws kUnknownColumn.
  const Field& FieldNamed(std::string_view name) const;
  std::int32_t MaxFieldId() const;
};

bool IsIdentifier(std::string_view name);

/// Parses `name:type[:required],...`; field ids are assigned 1..n.
Schema ParseSchemaText(std::string_view text);

/// Throws kSchemaViolation if the row has the wrong arity, a value of the
/// wrong type, a null in a required column, a NaN, or invalid UTF-8.
void ValidateRow(const Schema& schema, const Row& row);

}  // namespace minilake
