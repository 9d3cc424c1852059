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

#include "minilake/schema.h"
#include "minilake/value.h"

namespace minilake {

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view CompareOpSymbol(CompareOp op);

/// One conjunct, bound to a schema field.
struct Atom {
  enum class Kind { kCompare, kIsNull, kIsNotNull };

  Kind kind = Kind::kCompare;
  std::string column;
  std::int32_t field_id = 0;
  ColumnType type = ColumnType::kInt64;
  CompareOp op = CompareOp::kEq;
  Value literal;  // non-null for kCompare, of type `type`

  bool operator==(const Atom&) const = default;
};

/// A conjunction of atoms; no atoms means TRUE.
struct Predicate {
  std::vector<Atom> atoms;

  bool operator==(const Predicate&) const = default;
  bool IsTrue() const { return atoms.empty(); }
};

/// Grammar:
///   expr    := atom ("AND" atom)*      (blank text is TRUE)
///   atom    := ident op literal | ident "IS" ["NOT"] "NULL" | "(" expr ")"
///   op      := = | != | < | <= | > | >=
///   literal := int | float | 'string' | true | false
///            | DATE 'YYYY-MM-DD' | TIMESTAMP 'YYYY-MM-DDTHH:MM:SS[.ffffff]Z'
/// Keywords are case-insensitive. Integer literals are accepted for float64
/// columns. Throws kParseError (with position and expected tokens),
/// kUnknownColumn, or kTypeMismatch.
Predicate ParsePredicate(std::string_view text, const Schema& schema);

/// Text that ParsePredicate maps back to an equal predicate.
std::string PredicateToString(const Predicate& predicate);
std::string LiteralToString(const Value& literal);

/// SQL three-valued logic collapsed to "is it TRUE": comparisons against
/// null are never true.
bool EvaluateAtom(const Atom& atom, const Value& value);

/// `row` is aligned to `schema.fields`.
bool EvaluatePredicate(const Predicate& predicate, const Schema& schema, const Row& row);

/// Field ids referenced by the predicate, deduplicated, in first-use order.
std::vector<std::int32_t> PredicateFieldIds(const Predicate& predicate);

}  // namespace minilake
