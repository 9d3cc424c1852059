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

#include "minilake/csv.h"

#include <algorithm>

#include "minilake/error.h"

namespace minilake {

CsvTable ParseCsv(std::string_view text) {
  std::vector<CsvRecord> records;
  CsvRecord record;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool field_started = false;
  int line = 1;
  auto end_field = [&] {
    if (quoted || !field.empty()) {
      record.emplace_back(std::move(field));
    } else {
      record.emplace_back(std::nullopt);
    }
    field.clear();
    quoted = false;
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A lone empty field is a blank line.
    if (!(record.size() == 1 && !record[0])) records.push_back(std::move(record));
    record.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started) {
        Throw(ErrorCode::kParseError, "line " + std::to_string(line) + ": stray quote");
      }
      quoted = in_quotes = field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
    } else {
      if (quoted) {
        Throw(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": text after closing quote");
      }
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) Throw(ErrorCode::kParseError, "unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) Throw(ErrorCode::kParseError, "missing header line");
  for (auto& cell : records.front()) {
    if (!cell || cell->empty()) Throw(ErrorCode::kParseError, "empty column name in header");
    table.header.push_back(std::move(*cell));
  }
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      Throw(ErrorCode::kParseError, "record " + std::to_string(r) + " has " +
                                        std::to_string(records[r].size()) + " fields, expected " +
                                        std::to_string(table.header.size()));
    }
    table.records.push_back(std::move(records[r]));
  }
  return table;
}

std::string FormatCsvField(const std::optional<std::string>& cell) {
  if (!cell) return {};
  const bool needs_quotes =
      cell->empty() || cell->find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return *cell;
  std::string out = "\"";
  for (char c : *cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string FormatCsvLine(const std::vector<std::optional<std::string>>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += FormatCsvField(cells[i]);
  }
  return out + "\n";
}

std::vector<Row> CsvToRows(const CsvTable& table, const Schema& schema) {
  std::vector<int> positions;
  for (const auto& name : table.header) {
    const int index = schema.IndexOfName(name);
    if (index < 0) Throw(ErrorCode::kUnknownColumn, "unknown column '" + name + "'");
    if (std::count(positions.begin(), positions.end(), index)) {
      Throw(ErrorCode::kDuplicateColumn, "column '" + name + "' appears twice in the header");
    }
    positions.push_back(index);
  }
  std::vector<Row> rows;
  rows.reserve(table.records.size());
  for (size_t r = 0; r < table.records.size(); ++r) {
    Row row(schema.fields.size());
    for (size_t c = 0; c < positions.size(); ++c) {
      const auto& cell = table.records[r][c];
      if (!cell) continue;
      const Field& field = schema.fields[static_cast<size_t>(positions[c])];
      auto value = ParseValue(field.type, *cell);
      if (!value) {
        Throw(ErrorCode::kSchemaViolation, "record " + std::to_string(r + 1) + ", column " +
                                               field.name + ": '" + *cell + "' is not a valid " +
                                               std::string(ColumnTypeName(field.type)));
      }
      row[static_cast<size_t>(positions[c])] = std::move(*value);
    }
    for (size_t f = 0; f < schema.fields.size(); ++f) {
      if (schema.fields[f].required && IsNull(row[f])) {
        Throw(ErrorCode::kSchemaViolation, "record " + std::to_string(r + 1) +
                                               ": required column " + schema.fields[f].name +
                                               " is null");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string RowsToCsv(const std::vector<std::string>& columns, const std::vector<Row>& rows) {
  std::vector<std::optional<std::string>> cells(columns.begin(), columns.end());
  std::string out = FormatCsvLine(cells);
  for (const auto& row : rows) {
    cells.clear();
    for (const auto& v : row) {
      cells.push_back(IsNull(v) ? std::nullopt : std::optional<std::string>(FormatValue(v)));
    }
    out += FormatCsvLine(cells);
  }
  return out;
}

}  // namespace minilake
