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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/schema.h"
#include "minilake/value.h"

namespace minilake {

/// Hidden-partitioning transform from a source column to a partition value.
///
///   identity      v
///   bucket[n]     fnv1a64(canonical bytes of v) mod n
///   truncate[w]   w * floor(v / w) for int64, first w code points for string
///   year          calendar year
///   month         (year - 1970) * 12 + (month - 1)
///   day           days since 1970-01-01
///
/// Every transform except bucket is monotone non-decreasing in its input.
struct Transform {
  enum class Kind { kIdentity, kBucket, kTruncate, kYear, kMonth, kDay };

  Kind kind = Kind::kIdentity;
  std::int32_t param = 0;  // bucket count or truncate width

  bool operator==(const Transform&) const = default;

  static Transform Identity() { return {Kind::kIdentity, 0}; }
  static Transform Bucket(std::int32_t n) { return {Kind::kBucket, n}; }
  static Transform Truncate(std::int32_t w) { return {Kind::kTruncate, w}; }
  static Transform Year() { return {Kind::kYear, 0}; }
  static Transform Month() { return {Kind::kMonth, 0}; }
  static Transform Day() { return {Kind::kDay, 0}; }

  bool IsMonotone() const { return kind != Kind::kBucket; }
};

/// "identity", "bucket[16]", "truncate[10]", "year", "month", "day".
std::string TransformToString(const Transform& transform);
std::optional<Transform> ParseTransformString(std::string_view text);

/// 64-bit FNV-1a (offset basis 14695981039346656037, prime 1099511628211).
std::uint64_t Fnv1a64(std::string_view bytes);

bool TransformSupports(const Transform& transform, ColumnType source);
/// Throws kUnsupportedTransform for illegal combinations.
ColumnType TransformResultType(const Transform& transform, ColumnType source);

/// Null maps to null. Throws kUnsupportedTransform when the value's type is
/// not a legal source for the transform.
Value ApplyTransform(const Transform& transform, const Value& value);

struct PartitionField {
  std::int32_t source_field_id = 0;
  Transform transform;
  std::string name;

  bool operator==(const PartitionField&) const = default;
};

struct PartitionSpec {
  std::int32_t spec_id = 0;
  std::vector<PartitionField> fields;

  bool operator==(const PartitionSpec&) const = default;
  bool IsUnpartitioned() const { return fields.empty(); }
};

/// A partition field as written by users: a transform over a column name.
struct PartitionFieldDef {
  Transform transform;
  std::string column;

  bool operator==(const PartitionFieldDef&) const = default;
};

/// Parses `identity(col)|bucket(N,col)|truncate(W,col)|year(col)|month(col)|day(col)`,
/// comma separated. An empty string is the unpartitioned spec.
std::vector<PartitionFieldDef> ParsePartitionText(std::string_view text);
std::string PartitionDefToString(const PartitionFieldDef& def);

/// Default partition field name: the column for identity, otherwise
/// `<column>_<transform>`.
std::string DefaultPartitionFieldName(const PartitionFieldDef& def);

/// Resolves column names against `schema` and checks transform legality.
PartitionSpec BindPartitionSpec(std::int32_t spec_id, const Schema& schema,
                                const std::vector<PartitionFieldDef>& defs);

/// Applies each spec field to its source column of `row`, in spec order.
std::vector<Value> PartitionTuple(const PartitionSpec& spec, const Schema& schema,
                                  const Row& row);

/// An injective string encoding of a partition tuple, for grouping.
std::string PartitionSignature(const std::vector<Value>& tuple);

}  // namespace minilake
