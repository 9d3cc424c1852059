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

#include "minilake/predicate.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "minilake/error.h"

namespace minilake {

std::string_view CompareOpSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::kEq:
      return "=";
    case CompareOp::kNe:
      return "!=";
    case CompareOp::kLt:
      return "<";
    case CompareOp::kLe:
      return "<=";
    case CompareOp::kGt:
      return ">";
    case CompareOp::kGe:
      return ">=";
  }
  return "?";
}

namespace {

enum class TokenKind { kWord, kInt, kFloat, kString, kOp, kLParen, kRParen, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;  // unescaped for strings
  size_t pos = 0;
};

bool IsWordStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsWordChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }

bool KeywordIs(const Token& token, std::string_view keyword) {
  if (token.kind != TokenKind::kWord || token.text.size() != keyword.size()) return false;
  for (size_t i = 0; i < keyword.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(token.text[i])) != keyword[i]) return false;
  }
  return true;
}

std::string Describe(const Token& token) {
  switch (token.kind) {
    case TokenKind::kEnd:
      return "end of input";
    case TokenKind::kString:
      return "string '" + token.text + "'";
    default:
      return "'" + token.text + "'";
  }
}

[[noreturn]] void SyntaxError(size_t pos, std::string_view expected, std::string_view found) {
  Throw(ErrorCode::kParseError, "at position " + std::to_string(pos) + ": expected " +
                                    std::string(expected) + ", found " + std::string(found));
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (true) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == text.size()) break;
    const size_t start = i;
    const char c = text[i];
    if (IsWordStart(c)) {
      while (i < text.size() && IsWordChar(text[i])) ++i;
      tokens.push_back({TokenKind::kWord, std::string(text.substr(start, i - start)), start});
    } else if (IsDigit(c) || (c == '-' && i + 1 < text.size() &&
                              (IsDigit(text[i + 1]) || text[i + 1] == '.')) ||
               (c == '.' && i + 1 < text.size() && IsDigit(text[i + 1]))) {
      bool is_float = false;
      if (c == '-') ++i;
      while (i < text.size() && IsDigit(text[i])) ++i;
      if (i < text.size() && text[i] == '.') {
        is_float = true;
        ++i;
        while (i < text.size() && IsDigit(text[i])) ++i;
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        size_t j = i + 1;
        if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < text.size() && IsDigit(text[j])) {
          is_float = true;
          i = j;
          while (i < text.size() && IsDigit(text[i])) ++i;
        }
      }
      if (i < text.size() && IsWordChar(text[i])) {
        SyntaxError(i, "a number", "'" + std::string(1, text[i]) + "'");
      }
      tokens.push_back({is_float ? TokenKind::kFloat : TokenKind::kInt,
                        std::string(text.substr(start, i - start)), start});
    } else if (c == '\'') {
      std::string value;
      ++i;
      while (true) {
        if (i == text.size()) SyntaxError(i, "closing quote", "end of input");
        if (text[i] == '\'') {
          if (i + 1 < text.size() && text[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value += text[i++];
      }
      tokens.push_back({TokenKind::kString, std::move(value), start});
    } else if (c == '(' || c == ')') {
      ++i;
      tokens.push_back({c == '(' ? TokenKind::kLParen : TokenKind::kRParen, std::string(1, c), start});
    } else if (c == '=' || c == '<' || c == '>' || c == '!') {
      ++i;
      if (i < text.size() && text[i] == '=') ++i;
      std::string op(text.substr(start, i - start));
      if (op == "!") SyntaxError(start, "comparison operator", "'!'");
      tokens.push_back({TokenKind::kOp, std::move(op), start});
    } else {
      SyntaxError(start, "a token", "'" + std::string(1, c) + "'");
    }
  }
  tokens.push_back({TokenKind::kEnd, "", text.size()});
  return tokens;
}

CompareOp OpFromText(std::string_view text) {
  if (text == "=") return CompareOp::kEq;
  if (text == "!=") return CompareOp::kNe;
  if (text == "<") return CompareOp::kLt;
  if (text == "<=") return CompareOp::kLe;
  if (text == ">") return CompareOp::kGt;
  return CompareOp::kGe;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Schema& schema)
      : tokens_(std::move(tokens)), schema_(schema) {}

  Predicate Parse() {
    Predicate out;
    if (Peek().kind == TokenKind::kEnd) return out;
    ParseExpr(out);
    if (Peek().kind != TokenKind::kEnd) SyntaxError(Peek().pos, "AND or end of input", Describe(Peek()));
    return out;
  }

 private:
  const Token& Peek() const { return tokens_[pos_]; }
  const Token& Next() { return tokens_[pos_++]; }

  void ParseExpr(Predicate& out) {
    ParseAtom(out);
    while (KeywordIs(Peek(), "AND")) {
      Next();
      ParseAtom(out);
    }
  }

  void ParseAtom(Predicate& out) {
    const Token& first = Next();
    if (first.kind == TokenKind::kLParen) {
      ParseExpr(out);
      const Token& close = Next();
      if (close.kind != TokenKind::kRParen) SyntaxError(close.pos, "')' or AND", Describe(close));
      return;
    }
    if (first.kind != TokenKind::kWord) SyntaxError(first.pos, "column name or '('", Describe(first));
    const Token& after = Next();
    if (KeywordIs(after, "IS")) {
      Atom atom = Bind(first.text);
      atom.kind = Atom::Kind::kIsNull;
      if (KeywordIs(Peek(), "NOT")) {
        Next();
        atom.kind = Atom::Kind::kIsNotNull;
      }
      const Token& null = Next();
      if (!KeywordIs(null, "NULL")) {
        SyntaxError(null.pos, atom.kind == Atom::Kind::kIsNull ? "NOT or NULL" : "NULL",
                    Describe(null));
      }
      out.atoms.push_back(std::move(atom));
      return;
    }
    if (after.kind != TokenKind::kOp) {
      SyntaxError(after.pos, "comparison operator or IS", Describe(after));
    }
    Atom atom = Bind(first.text);
    atom.kind = Atom::Kind::kCompare;
    atom.op = OpFromText(after.text);
    atom.literal = ParseLiteral(atom);
    out.atoms.push_back(std::move(atom));
  }

  Atom Bind(const std::string& column) const {
    const Field& field = schema_.FieldNamed(column);
    Atom atom;
    atom.column = field.name;
    atom.field_id = field.id;
    atom.type = field.type;
    return atom;
  }

  [[noreturn]] void Mismatch(const Atom& atom, std::string_view literal_type) const {
    Throw(ErrorCode::kTypeMismatch, "column " + atom.column + " has type " +
                                        std::string(ColumnTypeName(atom.type)) + ", literal is " +
                                        std::string(literal_type));
  }

  Value ParseLiteral(const Atom& atom) {
    const Token& token = Next();
    switch (token.kind) {
      case TokenKind::kInt: {
        std::int64_t v = 0;
        const char* end = token.text.data() + token.text.size();
        const auto [ptr, ec] = std::from_chars(token.text.data(), end, v);
        if (ec != std::errc() || ptr != end) {
          Throw(ErrorCode::kParseError, "at position " + std::to_string(token.pos) +
                                            ": integer literal out of range");
        }
        if (atom.type == ColumnType::kInt64) return v;
        if (atom.type == ColumnType::kFloat64) return static_cast<double>(v);
        Mismatch(atom, "int64");
      }
      case TokenKind::kFloat: {
        if (atom.type != ColumnType::kFloat64) Mismatch(atom, "float64");
        double v = 0;
        const char* end = token.text.data() + token.text.size();
        const auto [ptr, ec] = std::from_chars(token.text.data(), end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
          Throw(ErrorCode::kParseError, "at position " + std::to_string(token.pos) +
                                            ": float literal out of range");
        }
        return v;
      }
      case TokenKind::kString:
        if (atom.type != ColumnType::kString) Mismatch(atom, "string");
        if (!IsValidUtf8(token.text)) {
          Throw(ErrorCode::kParseError, "at position " + std::to_string(token.pos) +
                                            ": string literal is not valid UTF-8");
        }
        return token.text;
      case TokenKind::kWord: {
        if (KeywordIs(token, "TRUE") || KeywordIs(token, "FALSE")) {
          if (atom.type != ColumnType::kBool) Mismatch(atom, "bool");
          return KeywordIs(token, "TRUE");
        }
        const bool is_date = KeywordIs(token, "DATE");
        if (is_date || KeywordIs(token, "TIMESTAMP")) {
          const Token& body = Next();
          if (body.kind != TokenKind::kString) {
            SyntaxError(body.pos, "quoted literal", Describe(body));
          }
          if (is_date) {
            if (atom.type != ColumnType::kDate) Mismatch(atom, "date");
            if (auto d = ParseDate(body.text)) return *d;
          } else {
            if (atom.type != ColumnType::kTimestamp) Mismatch(atom, "timestamp");
            if (auto ts = ParseTimestamp(body.text)) return *ts;
          }
          Throw(ErrorCode::kParseError, "at position " + std::to_string(body.pos) +
                                            ": malformed " + (is_date ? "date" : "timestamp") +
                                            " '" + body.text + "'");
        }
        break;
      }
      default:
        break;
    }
    SyntaxError(token.pos, "literal", Describe(token));
  }

  std::vector<Token> tokens_;
  const Schema& schema_;
  size_t pos_ = 0;
};

std::string Quote(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

}  // namespace

Predicate ParsePredicate(std::string_view text, const Schema& schema) {
  return Parser(Tokenize(text), schema).Parse();
}

std::string LiteralToString(const Value& literal) {
  if (const auto* d = std::get_if<double>(&literal)) {
    std::string text = FormatDouble(*d);
    if (text.find_first_of(".e") == std::string::npos) text += ".0";
    return text;
  }
  if (const auto* s = std::get_if<std::string>(&literal)) return Quote(*s);
  if (const auto* d = std::get_if<Date>(&literal)) return "DATE " + Quote(FormatDate(*d));
  if (const auto* t = std::get_if<Timestamp>(&literal)) return "TIMESTAMP " + Quote(FormatTimestamp(*t));
  return FormatValue(literal);
}

std::string PredicateToString(const Predicate& predicate) {
  std::string out;
  for (const auto& atom : predicate.atoms) {
    if (!out.empty()) out += " AND ";
    out += atom.column;
    switch (atom.kind) {
      case Atom::Kind::kIsNull:
        out += " IS NULL";
        break;
      case Atom::Kind::kIsNotNull:
        out += " IS NOT NULL";
        break;
      case Atom::Kind::kCompare:
        out += " " + std::string(CompareOpSymbol(atom.op)) + " " + LiteralToString(atom.literal);
        break;
    }
  }
  return out;
}

bool EvaluateAtom(const Atom& atom, const Value& value) {
  switch (atom.kind) {
    case Atom::Kind::kIsNull:
      return IsNull(value);
    case Atom::Kind::kIsNotNull:
      return !IsNull(value);
    case Atom::Kind::kCompare:
      break;
  }
  if (IsNull(value)) return false;
  const auto order = CompareValues(value, atom.literal);
  switch (atom.op) {
    case CompareOp::kEq:
      return order == 0;
    case CompareOp::kNe:
      return order != 0;
    case CompareOp::kLt:
      return order < 0;
    case CompareOp::kLe:
      return order <= 0;
    case CompareOp::kGt:
      return order > 0;
    case CompareOp::kGe:
      return order >= 0;
  }
  return false;
}

bool EvaluatePredicate(const Predicate& predicate, const Schema& schema, const Row& row) {
  for (const auto& atom : predicate.atoms) {
    const int index = schema.IndexOfId(atom.field_id);
    const Value null_value;
    if (!EvaluateAtom(atom, index < 0 ? null_value : row[static_cast<size_t>(index)])) return false;
  }
  return true;
}

std::vector<std::int32_t> PredicateFieldIds(const Predicate& predicate) {
  std::vector<std::int32_t> ids;
  for (const auto& atom : predicate.atoms) {
    if (std::find(ids.begin(), ids.end(), atom.field_id) == ids.end()) ids.push_back(atom.field_id);
  }
  return ids;
}

}  // namespace minilake
