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

#include "minilake/columnar_file.h"

#include <bit>
#include <cstring>

#include "minilake/error.h"
#include "util.h"

namespace minilake {

using nlohmann::json;

const ColumnStats* DataFile::StatsFor(std::int32_t field_id) const {
  for (const auto& stats : this->stats) {
    if (stats.field_id == field_id) return &stats;
  }
  return nullptr;
}

namespace {

[[noreturn]] void Corrupt(const std::string& message) {
  Throw(ErrorCode::kCorruptFile, message);
}

template <typename T>
void PutLE(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  U bits = static_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T GetLE() {
    Need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U bits = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(bits);
  }

  std::string_view Take(size_t n) {
    Need(n);
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  size_t pos() const { return pos_; }

 private:
  void Need(size_t n) const {
    if (n > data_.size() - pos_) Corrupt("column data truncated");
  }

  std::string_view data_;
  size_t pos_ = 0;
};

void EncodeValue(std::string& out, const Value& value) {
  switch (value.index()) {
    case 1:
      out.push_back(std::get<bool>(value) ? 1 : 0);
      break;
    case 2:
      PutLE<std::int64_t>(out, std::get<std::int64_t>(value));
      break;
    case 3:
      PutLE<std::uint64_t>(out, std::bit_cast<std::uint64_t>(std::get<double>(value)));
      break;
    case 4: {
      const auto& s = std::get<std::string>(value);
      PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
      out += s;
      break;
    }
    case 5:
      PutLE<std::int32_t>(out, std::get<Date>(value).days);
      break;
    case 6:
      PutLE<std::int64_t>(out, std::get<Timestamp>(value).micros);
      break;
  }
}

Value DecodeValue(Reader& reader, ColumnType type) {
  switch (type) {
    case ColumnType::kBool: {
      auto byte = reader.GetLE<std::uint8_t>();
      if (byte > 1) Corrupt("bool byte out of range");
      return Value(byte == 1);
    }
    case ColumnType::kInt64:
      return Value(reader.GetLE<std::int64_t>());
    case ColumnType::kFloat64:
      return Value(std::bit_cast<double>(reader.GetLE<std::uint64_t>()));
    case ColumnType::kString: {
      auto length = reader.GetLE<std::uint32_t>();
      return Value(std::string(reader.Take(length)));
    }
    case ColumnType::kDate:
      return Value(Date{reader.GetLE<std::int32_t>()});
    case ColumnType::kTimestamp:
      return Value(Timestamp{reader.GetLE<std::int64_t>()});
  }
  return Value();
}

json FooterToJson(const FileFooter& footer) {
  json fields = json::array();
  for (const auto& field : footer.fields) {
    fields.push_back({{"id", field.id},
                      {"name", field.name},
                      {"required", field.required},
                      {"type", ColumnTypeName(field.type)}});
  }
  json stats = json::array();
  for (const auto& s : footer.stats) {
    json entry = {{"field_id", s.field_id}, {"null_count", s.null_count}};
    if (s.min) entry["min"] = *s.min;
    if (s.max) entry["max"] = *s.max;
    stats.push_back(std::move(entry));
  }
  return {{"fields", std::move(fields)},
          {"row_count", footer.row_count},
          {"schema_id", footer.schema_id},
          {"stats", std::move(stats)}};
}

FileFooter FooterFromJson(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) Corrupt("footer is not a JSON object");
  if (CanonicalDump(doc) != text) Corrupt("footer is not canonical");
  FileFooter footer;
  try {
    footer.row_count = doc.at("row_count").get<std::int64_t>();
    footer.schema_id = doc.at("schema_id").get<std::int32_t>();
    for (const auto& f : doc.at("fields")) {
      Field field;
      field.id = f.at("id").get<std::int32_t>();
      field.name = f.at("name").get<std::string>();
      field.required = f.at("required").get<bool>();
      auto type = ParseColumnType(f.at("type").get<std::string>());
      if (!type) Corrupt("unknown column type in footer");
      field.type = *type;
      footer.fields.push_back(std::move(field));
    }
    for (const auto& s : doc.at("stats")) {
      ColumnStats stats;
      stats.field_id = s.at("field_id").get<std::int32_t>();
      stats.null_count = s.at("null_count").get<std::int64_t>();
      if (s.contains("min")) stats.min = s.at("min").get<std::string>();
      if (s.contains("max")) stats.max = s.at("max").get<std::string>();
      footer.stats.push_back(std::move(stats));
    }
  } catch (const json::exception& e) {
    Corrupt(std::string("malformed footer: ") + e.what());
  }
  if (footer.row_count <= 0) Corrupt("footer row_count must be positive");
  if (footer.stats.size() != footer.fields.size()) Corrupt("stats/field count mismatch");
  for (size_t i = 0; i < footer.fields.size(); ++i) {
    const auto& stats = footer.stats[i];
    if (stats.field_id != footer.fields[i].id) Corrupt("stats out of field order");
    if (stats.null_count < 0 || stats.null_count > footer.row_count) {
      Corrupt("null_count inconsistent with row_count");
    }
    bool all_null = stats.null_count == footer.row_count;
    if (stats.min.has_value() == all_null || stats.max.has_value() == all_null) {
      Corrupt("min/max presence inconsistent with null_count");
    }
  }
  return footer;
}

// Splits a file into (column section, footer text) after checking the frame.
std::pair<std::string_view, std::string_view> SplitFrame(std::string_view bytes) {
  constexpr size_t kFrame = 4 + 4 + 4;
  if (bytes.size() < kFrame) Corrupt("file too short");
  if (bytes.substr(0, 4) != kMlfMagic) Corrupt("bad leading magic");
  if (bytes.substr(bytes.size() - 4) != kMlfMagic) Corrupt("bad trailing magic");
  Reader length_reader(bytes.substr(bytes.size() - 8, 4));
  auto footer_length = length_reader.GetLE<std::uint32_t>();
  if (footer_length > bytes.size() - kFrame) Corrupt("footer length exceeds file size");
  size_t footer_start = bytes.size() - 8 - footer_length;
  return {bytes.substr(4, footer_start - 4), bytes.substr(footer_start, footer_length)};
}

}  // namespace

std::vector<ColumnStats> ComputeStats(const Schema& schema, const std::vector<Row>& rows) {
  std::vector<ColumnStats> out;
  out.reserve(schema.fields.size());
  for (size_t col = 0; col < schema.fields.size(); ++col) {
    ColumnStats stats;
    stats.field_id = schema.fields[col].id;
    const Value* min = nullptr;
    const Value* max = nullptr;
    for (const auto& row : rows) {
      const Value& v = row[col];
      if (IsNull(v)) {
        ++stats.null_count;
        continue;
      }
      if (!min || CompareValues(v, *min) < 0) min = &v;
      if (!max || CompareValues(v, *max) > 0) max = &v;
    }
    if (min) stats.min = FormatValue(*min);
    if (max) stats.max = FormatValue(*max);
    out.push_back(std::move(stats));
  }
  return out;
}

std::string EncodeDataFile(const Schema& schema, const std::vector<Row>& rows) {
  if (rows.empty()) Throw(ErrorCode::kInvalidArgument, "a data file needs at least one row");
  for (const auto& row : rows) ValidateRow(schema, row);

  std::string out(kMlfMagic);
  const size_t bitmap_bytes = (rows.size() + 7) / 8;
  for (size_t col = 0; col < schema.fields.size(); ++col) {
    std::string bitmap(bitmap_bytes, '\0');
    for (size_t r = 0; r < rows.size(); ++r) {
      if (!IsNull(rows[r][col])) bitmap[r / 8] = static_cast<char>(bitmap[r / 8] | (1u << (r % 8)));
    }
    out += bitmap;
    for (const auto& row : rows) {
      if (!IsNull(row[col])) EncodeValue(out, row[col]);
    }
  }

  FileFooter footer;
  footer.row_count = static_cast<std::int64_t>(rows.size());
  footer.schema_id = schema.schema_id;
  footer.fields = schema.fields;
  footer.stats = ComputeStats(schema, rows);
  std::string footer_text = CanonicalDump(FooterToJson(footer));
  out += footer_text;
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(footer_text.size()));
  out += kMlfMagic;
  return out;
}

FileFooter DecodeFooter(std::string_view bytes) {
  return FooterFromJson(SplitFrame(bytes).second);
}

DecodedFile DecodeDataFile(std::string_view bytes) {
  auto [columns, footer_text] = SplitFrame(bytes);
  DecodedFile decoded;
  decoded.footer = FooterFromJson(footer_text);
  const auto& footer = decoded.footer;
  const size_t row_count = static_cast<size_t>(footer.row_count);
  const size_t bitmap_bytes = (row_count + 7) / 8;

  decoded.rows.assign(row_count, Row(footer.fields.size()));
  Reader reader(columns);
  for (size_t col = 0; col < footer.fields.size(); ++col) {
    const Field& field = footer.fields[col];
    std::string_view bitmap = reader.Take(bitmap_bytes);
    if (row_count % 8 != 0) {
      auto last = static_cast<unsigned char>(bitmap.back());
      if (last >> (row_count % 8)) Corrupt("nonzero padding bits in null bitmap");
    }
    std::int64_t nulls = 0;
    for (size_t r = 0; r < row_count; ++r) {
      bool present = (static_cast<unsigned char>(bitmap[r / 8]) >> (r % 8)) & 1u;
      if (!present) {
        if (field.required) Corrupt("null in required column '" + field.name + "'");
        ++nulls;
        continue;
      }
      decoded.rows[r][col] = DecodeValue(reader, field.type);
    }
    if (nulls != footer.stats[col].null_count) Corrupt("null_count disagrees with bitmap");
  }
  if (reader.pos() != columns.size()) Corrupt("trailing bytes before footer");

  Schema schema{footer.schema_id, footer.fields};
  try {
    for (const auto& row : decoded.rows) ValidateRow(schema, row);
  } catch (const Error& e) {
    Corrupt(e.what());
  }
  if (ComputeStats(schema, decoded.rows) != footer.stats) {
    Corrupt("footer statistics disagree with column data");
  }
  return decoded;
}

DataFile WriteDataFile(const ObjectStore& store, const Schema& schema,
                       const std::vector<Row>& rows, std::string_view key) {
  std::string bytes = EncodeDataFile(schema, rows);
  store.Put(key, bytes);
  DataFile file;
  file.key = std::string(key);
  file.record_count = static_cast<std::int64_t>(rows.size());
  file.file_size_bytes = static_cast<std::int64_t>(bytes.size());
  file.stats = ComputeStats(schema, rows);
  return file;
}

std::vector<Row> ReadDataFile(const ObjectStore& store, std::string_view key,
                              const Schema& read_schema,
                              std::span<const std::int32_t> projection) {
  DecodedFile decoded = DecodeDataFile(store.Get(key));
  Schema file_schema{decoded.footer.schema_id, decoded.footer.fields};

  // For each projected id: its column in the file, or -1 for "not present".
  std::vector<int> source(projection.size(), -1);
  for (size_t i = 0; i < projection.size(); ++i) {
    const Field* wanted = read_schema.FindById(projection[i]);
    if (!wanted) {
      Throw(ErrorCode::kUnknownColumn,
            "field id " + std::to_string(projection[i]) + " not in read schema");
    }
    int index = file_schema.IndexOfId(projection[i]);
    if (index >= 0 && file_schema.fields[index].type != wanted->type) {
      Corrupt("type of field '" + wanted->name + "' differs in " + std::string(key));
    }
    source[i] = index;
  }

  std::vector<Row> out;
  out.reserve(decoded.rows.size());
  for (auto& row : decoded.rows) {
    Row projected(projection.size());
    for (size_t i = 0; i < projection.size(); ++i) {
      if (source[i] >= 0) projected[i] = row[source[i]];
    }
    out.push_back(std::move(projected));
  }
  return out;
}

FileFooter ReadFooter(const ObjectStore& store, std::string_view key) {
  return DecodeFooter(store.Get(key));
}

}  // namespace minilake
