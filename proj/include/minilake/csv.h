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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minilake/schema.h"

namespace minilake {

/// A cell is nullopt when the field was empty and unquoted.
using CsvRecord = std::vector<std::optional<std::string>>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRecord> records;
};

/// RFC 4180 with LF or CRLF line ends. The first record is the header; every
/// record must have as many fields as the header. Throws kParseError.
CsvTable ParseCsv(std::string_view text);

/// Quotes when needed; nullopt renders as an empty field and "" as `""`.
std::string FormatCsvField(const std::optional<std::string>& cell);
std::string FormatCsvLine(const std::vector<std::optional<std::string>>& cells);

/// Columns are matched to `schema` by header name; schema columns missing
/// from the header read as null. Cells go through ParseValue. Throws
/// kUnknownColumn, kDuplicateColumn, kSchemaViolation.
std::vector<Row> CsvToRows(const CsvTable& table, const Schema& schema);

/// Header line plus one line per row; null cells are empty fields.
std::string RowsToCsv(const std::vector<std::string>& columns, const std::vector<Row>& rows);

}  // namespace minilake
