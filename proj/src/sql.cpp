#include "headroom/sql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "headroom/error.hpp"

namespace headroom {

std::string print_sql(const ConjunctiveQuery& query, const Catalog& catalog) {
  auto canonical = query;
  canonical.canonicalize();

  std::string out = "SELECT COUNT(*) FROM ";
  for (std::size_t i = 0; i < canonical.tables.size(); ++i) {
    if (i) out += ", ";
    out += catalog.table(canonical.tables[i]).name;
  }

  std::vector<std::string> conditions;
  for (const auto e : canonical.joins) {
    const auto& edge = catalog.edge(e);
    conditions.push_back(catalog.qualified_name(edge.left) + " = " + catalog.qualified_name(edge.right));
  }
  for (const auto& predicate : canonical.predicates) {
    conditions.push_back(catalog.qualified_name(predicate.column) + " " + std::string(to_string(predicate.op)) + " " +
                         format_literal(predicate.literal));
  }
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    out += i ? " AND " : " WHERE ";
    out += conditions[i];
  }
  out += ';';
  return out;
}

namespace {

enum class TokenKind { Identifier, Number, String, Symbol, End };

struct Token {
  TokenKind kind;
  std::string text;  // identifiers and symbols verbatim, strings unquoted
  std::size_t offset;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const auto start = pos_;
    if (pos_ == text_.size()) return {TokenKind::End, "", start};
    const char c = text_[pos_];

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      return {TokenKind::Identifier, std::string(text_.substr(start, pos_ - start)), start};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') return number(start);
    if (c == '\'') return string(start);
    for (const std::string_view symbol : {"<=", ">=", "<>"}) {
      if (text_.substr(pos_, 2) == symbol) {
        pos_ += 2;
        return {TokenKind::Symbol, std::string(symbol), start};
      }
    }
    if (std::string_view("(),.*;=<>").find(c) != std::string_view::npos) {
      ++pos_;
      return {TokenKind::Symbol, std::string(1, c), start};
    }
    throw SyntaxError(start, std::string("unexpected character '") + c + "'");
  }

 private:
  bool digits() {
    const auto start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ > start;
  }

  Token number(std::size_t start) {
    if (text_[pos_] == '-') ++pos_;
    if (!digits()) throw SyntaxError(pos_, "expected digits");
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      if (!digits()) throw SyntaxError(pos_, "expected digits after '.'");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (!digits()) throw SyntaxError(pos_, "expected exponent digits");
    }
    return {TokenKind::Number, std::string(text_.substr(start, pos_ - start)), start};
  }

  Token string(std::size_t start) {
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= text_.size()) throw SyntaxError(start, "unterminated string literal");
      const char c = text_[pos_++];
      if (c != '\'') {
        value.push_back(c);
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == '\'') {
        value.push_back('\'');
        ++pos_;
        continue;
      }
      return {TokenKind::String, std::move(value), start};
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool keyword_equals(const Token& token, std::string_view keyword) {
  if (token.kind != TokenKind::Identifier || token.text.size() != keyword.size()) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(token.text[i])) != keyword[i]) return false;
  }
  return true;
}

bool is_keyword(const Token& token) {
  for (const auto* keyword : {"SELECT", "COUNT", "FROM", "WHERE", "AND"}) {
    if (keyword_equals(token, keyword)) return true;
  }
  return false;
}

struct RawColumn {
  std::string table;
  std::string column;
  std::size_t offset;
};

struct RawCondition {
  RawColumn left;
  std::string op;
  std::optional<RawColumn> right;  // join condition
  Token literal{TokenKind::End, "", 0};
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  void run(std::vector<Token>& tables, std::vector<RawCondition>& conditions) {
    expect_keyword("SELECT");
    expect_keyword("COUNT");
    expect_symbol("(");
    expect_symbol("*");
    expect_symbol(")");
    expect_keyword("FROM");
    tables.push_back(identifier("table name"));
    while (accept_symbol(",")) tables.push_back(identifier("table name"));
    if (keyword_equals(token_, "WHERE")) {
      advance();
      conditions.push_back(condition());
      while (keyword_equals(token_, "AND")) {
        advance();
        conditions.push_back(condition());
      }
    }
    expect_symbol(";");
    if (token_.kind != TokenKind::End) throw SyntaxError(token_.offset, "trailing text after ';'");
  }

 private:
  void advance() { token_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& expected) const {
    const auto found = token_.kind == TokenKind::End ? std::string("end of input") : "'" + token_.text + "'";
    throw SyntaxError(token_.offset, "expected " + expected + ", found " + found);
  }

  void expect_keyword(std::string_view keyword) {
    if (!keyword_equals(token_, keyword)) fail(std::string(keyword));
    advance();
  }

  bool accept_symbol(std::string_view symbol) {
    if (token_.kind != TokenKind::Symbol || token_.text != symbol) return false;
    advance();
    return true;
  }

  void expect_symbol(std::string_view symbol) {
    if (!accept_symbol(symbol)) fail("'" + std::string(symbol) + "'");
  }

  Token identifier(const std::string& what) {
    if (token_.kind != TokenKind::Identifier || is_keyword(token_)) fail(what);
    auto result = token_;
    advance();
    return result;
  }

  RawColumn column() {
    const auto table = identifier("table name");
    expect_symbol(".");
    const auto name = identifier("column name");
    return {table.text, name.text, table.offset};
  }

  RawCondition condition() {
    RawCondition result;
    result.left = column();
    static constexpr std::string_view kOps[] = {"=", "<", ">", "<=", ">=", "<>"};
    if (token_.kind != TokenKind::Symbol || std::find(std::begin(kOps), std::end(kOps), token_.text) == std::end(kOps)) {
      fail("comparison operator");
    }
    result.op = token_.text;
    advance();
    if (token_.kind == TokenKind::Identifier && !is_keyword(token_)) {
      if (result.op != "=") throw SyntaxError(token_.offset, "column comparisons must use '='");
      result.right = column();
      return result;
    }
    if (token_.kind != TokenKind::Number && token_.kind != TokenKind::String) fail("literal or column");
    result.literal = token_;
    advance();
    return result;
  }

  Lexer lexer_;
  Token token_{TokenKind::End, "", 0};
};

CmpOp parse_op(const std::string& text) {
  for (const auto op : kCmpOps) {
    if (to_string(op) == text) return op;
  }
  throw Error("query", "unknown operator " + text);
}

Value literal_for(const Token& token, ColumnType type, const std::string& column) {
  const auto mismatch = [&](std::string_view kind) {
    return Error("query", "literal " + (token.kind == TokenKind::String ? "'" + token.text + "'" : token.text) +
                              " is " + std::string(kind) + " but " + column + " is " + std::string(to_string(type)));
  };
  if (token.kind == TokenKind::String) {
    if (type != ColumnType::String) throw mismatch("a string");
    return token.text;
  }
  const auto& text = token.text;
  const bool integral = text.find_first_of(".eE") == std::string::npos;
  if (type == ColumnType::String) throw mismatch("numeric");
  if (type == ColumnType::Integer) {
    if (!integral) throw mismatch("fractional");
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Error("query", "integer literal " + text + " out of range at offset " + std::to_string(token.offset));
    }
    return v;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error("query", "float literal " + text + " out of range at offset " + std::to_string(token.offset));
  }
  return v;
}

}  // namespace

ConjunctiveQuery parse_sql(std::string_view text, const Catalog& catalog) {
  std::vector<Token> table_tokens;
  std::vector<RawCondition> conditions;
  Parser(text).run(table_tokens, conditions);

  ConjunctiveQuery query;
  for (const auto& token : table_tokens) {
    const auto index = catalog.table_index(token.text);
    if (!index) throw Error("query", "unknown table '" + token.text + "' at offset " + std::to_string(token.offset));
    if (std::find(query.tables.begin(), query.tables.end(), *index) != query.tables.end()) {
      throw Error("query", "table '" + token.text + "' listed twice; aliases are not supported");
    }
    query.tables.push_back(*index);
  }

  const auto resolve = [&](const RawColumn& raw) {
    const auto table = catalog.table_index(raw.table);
    if (!table || std::find(query.tables.begin(), query.tables.end(), *table) == query.tables.end()) {
      throw Error("query", "table '" + raw.table + "' at offset " + std::to_string(raw.offset) +
                               " is not in the FROM list");
    }
    const auto column = catalog.table(*table).column_index(raw.column);
    if (!column) {
      throw Error("query", "unknown column '" + raw.table + "." + raw.column + "' at offset " +
                               std::to_string(raw.offset));
    }
    return ColumnRef{*table, *column};
  };

  for (const auto& condition : conditions) {
    const auto left = resolve(condition.left);
    if (condition.right) {
      const auto right = resolve(*condition.right);
      const auto edge = catalog.find_edge(left, right);
      if (!edge) {
        throw Error("query", "no join edge " + catalog.qualified_name(left) + " = " + catalog.qualified_name(right) +
                                 " in the catalog");
      }
      query.joins.push_back(*edge);
      continue;
    }
    const auto& def = catalog.column_def(left);
    query.predicates.push_back(
        {left, parse_op(condition.op), literal_for(condition.literal, def.type, catalog.qualified_name(left))});
  }

  query.canonicalize();
  require_valid(query, catalog);
  return query;
}

std::vector<NamedQuery> parse_sql_script(std::string_view text, const Catalog& catalog) {
  static constexpr std::string_view kHeader = "-- name:";
  std::vector<NamedQuery> result;
  std::optional<std::string> name;
  std::string body;
  std::size_t body_offset = 0;

  const auto flush = [&] {
    if (!name) {
      if (body.find_first_not_of(" \t\r\n") != std::string::npos) {
        throw SyntaxError(body_offset, "query text before the first '-- name:' header");
      }
      return;
    }
    try {
      result.push_back({*name, parse_sql(body, catalog)});
    } catch (const Error& e) {
      throw Error(e.kind(), "in query " + *name + ": " + e.what());
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with(kHeader)) {
      flush();
      auto label = line.substr(kHeader.size());
      while (!label.empty() && std::isspace(static_cast<unsigned char>(label.front()))) label.remove_prefix(1);
      while (!label.empty() && std::isspace(static_cast<unsigned char>(label.back()))) label.remove_suffix(1);
      if (label.empty()) throw SyntaxError(pos, "empty query name");
      name = std::string(label);
      body.clear();
      body_offset = end;
    } else if (!line.starts_with("--")) {
      body += line;
      body.push_back('\n');
    }
    pos = end + 1;
  }
  flush();
  return result;
}

}  // namespace headroom
