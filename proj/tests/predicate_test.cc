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

#include <gtest/gtest.h>

#include <random>

#include "minilake/error.h"
#include "minilake/predicate.h"
#include "test_util.h"

namespace minilake {
namespace {

using testing::CodeOf;

const Schema& Sales() {
  static const Schema schema = ParseSchemaText(
      "id:int64:required,region:string,amount:float64,ts:timestamp,day:date,flag:bool");
  return schema;
}

std::string ErrorMessage(const std::string& text) {
  try {
    ParsePredicate(text, Sales());
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(PredicateParseTest, Examples) {
  const Predicate two = ParsePredicate("region = 'EU' AND amount > 100.0", Sales());
  ASSERT_EQ(two.atoms.size(), 2u);
  EXPECT_EQ(two.atoms[0].column, "region");
  EXPECT_EQ(two.atoms[0].field_id, 2);
  EXPECT_EQ(two.atoms[0].literal, Value(std::string("EU")));
  EXPECT_EQ(two.atoms[1].op, CompareOp::kGt);
  EXPECT_EQ(two.atoms[1].literal, Value(100.0));

  const Predicate ts = ParsePredicate("ts >= TIMESTAMP '2023-07-01T00:00:00Z'", Sales());
  ASSERT_EQ(ts.atoms.size(), 1u);
  EXPECT_EQ(ts.atoms[0].type, ColumnType::kTimestamp);
  EXPECT_EQ(ts.atoms[0].op, CompareOp::kGe);
  EXPECT_EQ(ts.atoms[0].literal, Value(Timestamp{testing::OracleMicros(2023, 7, 1, 0, 0, 0)}));

  EXPECT_EQ(CodeOf([] { ParsePredicate("amount > 'x'", Sales()); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(CodeOf([] { ParsePredicate("a AND", Sales()); }), ErrorCode::kParseError);
  EXPECT_NE(ErrorMessage("id = 1 AND").find("end of input"), std::string::npos);
  EXPECT_TRUE(ParsePredicate("   ", Sales()).IsTrue());
}

TEST(PredicateParseTest, GrammarCorners) {
  const Predicate p = ParsePredicate(
      "(id >= -3 and (region is not null)) AnD day = DATE '2020-02-29' and flag = TRUE "
      "and region != 'it''s' and amount <= 7 AND ts IS NULL",
      Sales());
  ASSERT_EQ(p.atoms.size(), 7u);
  EXPECT_EQ(p.atoms[0].literal, Value(std::int64_t{-3}));
  EXPECT_EQ(p.atoms[1].kind, Atom::Kind::kIsNotNull);
  EXPECT_EQ(p.atoms[2].literal, Value(Date{static_cast<std::int32_t>(
                                    testing::OracleDaysFromCivil(2020, 2, 29))}));
  EXPECT_EQ(p.atoms[3].literal, Value(true));
  EXPECT_EQ(p.atoms[4].literal, Value(std::string("it's")));
  EXPECT_EQ(p.atoms[5].literal, Value(7.0));  // int literal on a float column
  EXPECT_EQ(p.atoms[6].kind, Atom::Kind::kIsNull);
  EXPECT_EQ(PredicateFieldIds(p), (std::vector<std::int32_t>{1, 2, 5, 6, 3, 4}));
}

TEST(PredicateParseTest, Errors) {
  for (const char* text : {"id =", "id 5", "= 5", "(id = 1", "id = 1)", "id = 1 OR id = 2",
                           "id = 'unterminated", "id = 99999999999999999999", "id ! 3",
                           "id IS NOT 5", "day = DATE 'nope'", "day = DATE '2021-02-29'",
                           "ts = TIMESTAMP '2023-01-01'", "id = 12abc", "id = 1 id = 2"}) {
    EXPECT_EQ(CodeOf([&] { ParsePredicate(text, Sales()); }), ErrorCode::kParseError) << text;
  }
  EXPECT_EQ(CodeOf([] { ParsePredicate("nope = 1", Sales()); }), ErrorCode::kUnknownColumn);
  for (const char* text : {"id = 1.5", "region = 3", "flag = 1", "day = '2020-01-01'",
                           "ts = DATE '2020-01-01'", "amount = true"}) {
    EXPECT_EQ(CodeOf([&] { ParsePredicate(text, Sales()); }), ErrorCode::kTypeMismatch) << text;
  }
  EXPECT_EQ(ErrorMessage("id = = 3"), "at position 5: expected literal, found '='");
}

TEST(PredicateEvalTest, NullSemantics) {
  const Schema schema = ParseSchemaText("x:int64");
  const Predicate ne = ParsePredicate("x != 5", schema);
  std::vector<std::int64_t> kept;
  for (const Value& v : {Value(std::int64_t{5}), Value(), Value(std::int64_t{6})}) {
    if (EvaluatePredicate(ne, schema, {v})) kept.push_back(std::get<std::int64_t>(v));
  }
  EXPECT_EQ(kept, (std::vector<std::int64_t>{6}));
  EXPECT_TRUE(EvaluatePredicate(ParsePredicate("x IS NULL", schema), schema, {Value()}));
  EXPECT_FALSE(EvaluatePredicate(ParsePredicate("x IS NOT NULL", schema), schema, {Value()}));
  EXPECT_FALSE(EvaluatePredicate(ParsePredicate("x < 1", schema), schema, {Value()}));
  EXPECT_TRUE(EvaluatePredicate(Predicate{}, schema, {Value()}));
}

TEST(PredicateEvalTest, StringsCompareByBytes) {
  const Schema schema = ParseSchemaText("s:string");
  const Predicate p = ParsePredicate("s > 'Z'", schema);
  EXPECT_TRUE(EvaluatePredicate(p, schema, {std::string("a")}));
  EXPECT_TRUE(EvaluatePredicate(p, schema, {std::string("\xc3\xa9")}));
  EXPECT_FALSE(EvaluatePredicate(p, schema, {std::string("A")}));
}

Value RandomLiteral(ColumnType type, std::mt19937_64& rng) {
  switch (type) {
    case ColumnType::kBool:
      return static_cast<bool>(rng() & 1);
    case ColumnType::kInt64:
      return static_cast<std::int64_t>(rng());
    case ColumnType::kFloat64: {
      const double choices[] = {0.0, -1.5, 1e300, 3.0, 0.1, -2.5e-8, 123456789.0};
      return choices[rng() % 7] * (rng() % 2 ? 1 : -1);
    }
    case ColumnType::kString: {
      const char* choices[] = {"", "EU", "it's", "''", "a b", "\xc3\xa9t\xc3\xa9", "AND"};
      return std::string(choices[rng() % 7]);
    }
    case ColumnType::kDate:
      return Date{static_cast<std::int32_t>(rng() % 100000) - 50000};
    case ColumnType::kTimestamp:
      return Timestamp{static_cast<std::int64_t>(rng() % 2'000'000'000'000'000) -
                       1'000'000'000'000'000};
  }
  return {};
}

TEST(PredicateRoundTripTest, PrintThenParseIsIdentity) {
  std::mt19937_64 rng(4242);
  const Schema& schema = Sales();
  for (int i = 0; i < 1000; ++i) {
    Predicate p;
    for (size_t n = rng() % 5; n > 0; --n) {
      const Field& field = schema.fields[rng() % schema.fields.size()];
      Atom atom;
      atom.column = field.name;
      atom.field_id = field.id;
      atom.type = field.type;
      const unsigned kind = rng() % 6;
      if (kind == 0) {
        atom.kind = Atom::Kind::kIsNull;
      } else if (kind == 1) {
        atom.kind = Atom::Kind::kIsNotNull;
      } else {
        atom.op = static_cast<CompareOp>(rng() % 6);
        atom.literal = RandomLiteral(field.type, rng);
      }
      p.atoms.push_back(std::move(atom));
    }
    const std::string text = PredicateToString(p);
    ASSERT_EQ(ParsePredicate(text, schema), p) << text;
  }
}

}  // namespace
}  // namespace minilake
