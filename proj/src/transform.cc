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

#include "minilake/transform.h"

#include <charconv>
#include <limits>
#include <set>

#include "minilake/error.h"
#include "util.h"

namespace minilake {

namespace {

std::string_view KindName(Transform::Kind kind) {
  switch (kind) {
    case Transform::Kind::kIdentity:
      return "identity";
    case Transform::Kind::kBucket:
      return "bucket";
    case Transform::Kind::kTruncate:
      return "truncate";
    case Transform::Kind::kYear:
      return "year";
    case Transform::Kind::kMonth:
      return "month";
    case Transform::Kind::kDay:
      return "day";
  }
  return "?";
}

std::optional<Transform::Kind> KindFromName(std::string_view name) {
  using Kind = Transform::Kind;
  for (Kind kind : {Kind::kIdentity, Kind::kBucket, Kind::kTruncate, Kind::kYear, Kind::kMonth,
                    Kind::kDay}) {
    if (KindName(kind) == name) return kind;
  }
  return std::nullopt;
}

bool HasParam(Transform::Kind kind) {
  return kind == Transform::Kind::kBucket || kind == Transform::Kind::kTruncate;
}

std::optional<std::int32_t> ParsePositive(std::string_view text) {
  std::int32_t value = 0;
  auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size() ||
      value <= 0) {
    return std::nullopt;
  }
  return value;
}

[[noreturn]] void Unsupported(const Transform& transform, std::string_view what) {
  Throw(ErrorCode::kUnsupportedTransform,
        TransformToString(transform) + " cannot be applied to " + std::string(what));
}

std::int64_t DaysOf(const Value& value) {
  if (auto* date = std::get_if<Date>(&value)) return date->days;
  return FloorDiv(std::get<Timestamp>(value).micros, kMicrosPerDay);
}

std::string CanonicalBucketBytes(const Value& value) {
  std::uint64_t bits = 0;
  switch (value.index()) {
    case 2:
      bits = static_cast<std::uint64_t>(std::get<std::int64_t>(value));
      break;
    case 4:
      return std::get<std::string>(value);
    case 5:
      bits = static_cast<std::uint64_t>(static_cast<std::int64_t>(std::get<Date>(value).days));
      break;
    case 6:
      bits = static_cast<std::uint64_t>(std::get<Timestamp>(value).micros);
      break;
  }
  std::string out(8, '\0');
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  return out;
}

}  // namespace

std::string TransformToString(const Transform& transform) {
  std::string out(KindName(transform.kind));
  if (HasParam(transform.kind)) out += "[" + std::to_string(transform.param) + "]";
  return out;
}

std::optional<Transform> ParseTransformString(std::string_view text) {
  size_t bracket = text.find('[');
  auto kind = KindFromName(text.substr(0, bracket));
  if (!kind) return std::nullopt;
  if (!HasParam(*kind)) {
    if (bracket != std::string_view::npos) return std::nullopt;
    return Transform{*kind, 0};
  }
  if (bracket == std::string_view::npos || text.back() != ']') return std::nullopt;
  auto param = ParsePositive(text.substr(bracket + 1, text.size() - bracket - 2));
  if (!param) return std::nullopt;
  return Transform{*kind, *param};
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

bool TransformSupports(const Transform& transform, ColumnType source) {
  switch (transform.kind) {
    case Transform::Kind::kIdentity:
      return source != ColumnType::kFloat64;
    case Transform::Kind::kBucket:
      return transform.param > 0 &&
             (source == ColumnType::kInt64 || source == ColumnType::kString ||
              source == ColumnType::kDate || source == ColumnType::kTimestamp);
    case Transform::Kind::kTruncate:
      return transform.param > 0 &&
             (source == ColumnType::kInt64 || source == ColumnType::kString);
    case Transform::Kind::kYear:
    case Transform::Kind::kMonth:
    case Transform::Kind::kDay:
      return source == ColumnType::kDate || source == ColumnType::kTimestamp;
  }
  return false;
}

ColumnType TransformResultType(const Transform& transform, ColumnType source) {
  if (!TransformSupports(transform, source)) Unsupported(transform, ColumnTypeName(source));
  switch (transform.kind) {
    case Transform::Kind::kIdentity:
    case Transform::Kind::kTruncate:
      return source;
    default:
      return ColumnType::kInt64;
  }
}

Value ApplyTransform(const Transform& transform, const Value& value) {
  auto type = TypeOf(value);
  if (!type) return Value();
  if (!TransformSupports(transform, *type)) Unsupported(transform, ColumnTypeName(*type));
  switch (transform.kind) {
    case Transform::Kind::kIdentity:
      return value;
    case Transform::Kind::kBucket:
      return Value(static_cast<std::int64_t>(Fnv1a64(CanonicalBucketBytes(value)) %
                                             static_cast<std::uint64_t>(transform.param)));
    case Transform::Kind::kTruncate: {
      if (auto* s = std::get_if<std::string>(&value)) {
        return Value(std::string(Utf8Prefix(*s, transform.param)));
      }
      const __int128 v = std::get<std::int64_t>(value);
      const __int128 w = transform.param;
      __int128 q = v / w;
      if (v % w != 0 && v < 0) --q;
      const __int128 truncated = q * w;
      if (truncated < std::numeric_limits<std::int64_t>::min()) {
        Unsupported(transform, "a value whose truncation underflows int64");
      }
      return Value(static_cast<std::int64_t>(truncated));
    }
    case Transform::Kind::kYear:
      return Value(static_cast<std::int64_t>(CivilFromDays(DaysOf(value)).year));
    case Transform::Kind::kMonth: {
      CivilDate civil = CivilFromDays(DaysOf(value));
      return Value(static_cast<std::int64_t>((civil.year - 1970) * 12 + (civil.month - 1)));
    }
    case Transform::Kind::kDay:
      return Value(DaysOf(value));
  }
  return Value();
}

std::vector<PartitionFieldDef> ParsePartitionText(std::string_view text) {
  std::vector<PartitionFieldDef> defs;
  for (std::string_view item : SplitTopLevel(text, ',')) {
    item = Trim(item);
    size_t open = item.find('(');
    if (open == std::string_view::npos || item.back() != ')') {
      Throw(ErrorCode::kInvalidArgument, "bad partition field '" + std::string(item) + "'");
    }
    auto kind = KindFromName(Trim(item.substr(0, open)));
    if (!kind) {
      Throw(ErrorCode::kInvalidArgument, "unknown transform in '" + std::string(item) + "'");
    }
    auto args = SplitTopLevel(item.substr(open + 1, item.size() - open - 2), ',');
    PartitionFieldDef def;
    def.transform.kind = *kind;
    if (HasParam(*kind)) {
      std::optional<std::int32_t> param;
      if (args.size() == 2) param = ParsePositive(Trim(args[0]));
      if (!param) {
        Throw(ErrorCode::kInvalidArgument,
              "expected " + std::string(KindName(*kind)) + "(N,col) in '" + std::string(item) + "'");
      }
      def.transform.param = *param;
      def.column = std::string(Trim(args[1]));
    } else {
      if (args.size() != 1) {
        Throw(ErrorCode::kInvalidArgument, "expected one column in '" + std::string(item) + "'");
      }
      def.column = std::string(Trim(args[0]));
    }
    if (!IsIdentifier(def.column)) {
      Throw(ErrorCode::kInvalidArgument, "bad column name in '" + std::string(item) + "'");
    }
    defs.push_back(std::move(def));
  }
  return defs;
}

std::string PartitionDefToString(const PartitionFieldDef& def) {
  std::string out(KindName(def.transform.kind));
  out += "(";
  if (HasParam(def.transform.kind)) out += std::to_string(def.transform.param) + ",";
  return out + def.column + ")";
}

std::string DefaultPartitionFieldName(const PartitionFieldDef& def) {
  switch (def.transform.kind) {
    case Transform::Kind::kIdentity:
      return def.column;
    case Transform::Kind::kTruncate:
      return def.column + "_trunc";
    default:
      return def.column + "_" + std::string(KindName(def.transform.kind));
  }
}

PartitionSpec BindPartitionSpec(std::int32_t spec_id, const Schema& schema,
                                const std::vector<PartitionFieldDef>& defs) {
  PartitionSpec spec;
  spec.spec_id = spec_id;
  std::set<std::string> names;
  for (const auto& def : defs) {
    const Field& source = schema.FieldNamed(def.column);
    TransformResultType(def.transform, source.type);
    PartitionField field{source.id, def.transform, DefaultPartitionFieldName(def)};
    if (!names.insert(field.name).second) {
      Throw(ErrorCode::kDuplicateColumn, "duplicate partition field '" + field.name + "'");
    }
    spec.fields.push_back(std::move(field));
  }
  return spec;
}

std::vector<Value> PartitionTuple(const PartitionSpec& spec, const Schema& schema,
                                  const Row& row) {
  std::vector<Value> tuple;
  tuple.reserve(spec.fields.size());
  for (const auto& field : spec.fields) {
    int index = schema.IndexOfId(field.source_field_id);
    if (index < 0) {
      Throw(ErrorCode::kUnknownColumn,
            "partition source field " + std::to_string(field.source_field_id) + " not in schema");
    }
    tuple.push_back(ApplyTransform(field.transform, row[index]));
  }
  return tuple;
}

std::string PartitionSignature(const std::vector<Value>& tuple) {
  std::string out;
  for (const auto& v : tuple) {
    if (IsNull(v)) {
      out += "N;";
      continue;
    }
    const std::string text = FormatValue(v);
    out += "V" + std::to_string(text.size()) + ":" + text + ";";
  }
  return out;
}

}  // namespace minilake
