#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::sql {

// Lexer and recursive-descent parser for the read-only subset of the
// SQLite grammar: SELECT / VALUES / WITH ... SELECT, joins, subqueries,
// compound selects, window functions. Anything else is either reported as a
// non-query statement (with its leading verb) or as a parse failure at a
// specific token.

enum class TokenKind {
  Word,              // bare identifier or keyword
  QuotedIdentifier,  // "x", `x`, [x]
  String,            // 'x'
  Blob,              // X'00'
  Number,
  Parameter,         // ?, ?1, :name, @name, $name
  Punct,             // operators and punctuation
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;   // unquoted value for quoted tokens
  std::string upper;  // upper-cased text for Word tokens
  std::size_t offset = 0;
  std::size_t length = 0;

  bool is_word(std::string_view upper_word) const {
    return kind == TokenKind::Word && upper == upper_word;
  }
  bool is_punct(std::string_view p) const { return kind == TokenKind::Punct && text == p; }
};

struct LexError {
  std::string message;
  std::size_t offset = 0;
};

// Throws LexError on unterminated strings/comments or stray characters.
// The returned vector always ends with an End token. Comments are dropped.
std::vector<Token> tokenize(std::string_view sql);

struct Select;

struct Expr {
  enum class Kind {
    Literal,
    Parameter,
    Column,    // [schema.][qualifier.]name
    Star,      // * or qualifier.*, only inside COUNT(*) or result columns
    Function,  // name(args) [OVER (...)]
    Unary,
    Binary,
    Between,
    InList,
    InSelect,
    Exists,
    Subquery,
    Case,
    Cast,
    Row,  // (a, b, ...)
  };

  Kind kind = Kind::Literal;
  std::string text;       // literal text, operator, function name, cast type
  std::string qualifier;  // Column / Star
  std::string name;       // Column
  bool quoted = false;    // Column name was a quoted identifier
  bool negated = false;   // NOT IN / NOT BETWEEN / NOT LIKE ...
  std::vector<std::unique_ptr<Expr>> children;
  std::shared_ptr<Select> subquery;
  std::size_t begin = 0;  // source span, used for output column names
  std::size_t end = 0;
};

using ExprPtr = std::unique_ptr<Expr>;

struct ResultColumnExpr {
  ExprPtr expr;           // null for * / qualifier.*
  bool star = false;
  std::string star_qualifier;
  std::string alias;
};

enum class JoinKind { First, Comma, Inner, Left, Right, Full, Cross };

struct FromItem {
  enum class Kind { Table, Subquery, TableFunction };
  Kind kind = Kind::Table;
  std::string schema;
  std::string name;  // table or function name
  std::string alias;
  std::shared_ptr<Select> subquery;
  std::vector<ExprPtr> function_args;

  JoinKind join = JoinKind::First;
  bool natural = false;
  ExprPtr on;
  std::vector<std::string> using_columns;

  const std::string& effective_name() const { return alias.empty() ? name : alias; }
};

struct SelectCore {
  bool distinct = false;
  std::vector<ResultColumnExpr> columns;
  std::vector<FromItem> from;
  ExprPtr where;
  std::vector<ExprPtr> group_by;
  ExprPtr having;
  std::vector<std::vector<ExprPtr>> values;  // VALUES (...), (...)
  bool is_values = false;
};

struct CommonTableExpr {
  std::string name;
  std::vector<std::string> columns;
  std::shared_ptr<Select> select;
};

struct OrderTerm {
  ExprPtr expr;
  bool descending = false;
};

struct Select {
  bool recursive = false;
  std::vector<CommonTableExpr> ctes;
  std::vector<SelectCore> cores;
  std::vector<std::string> compound_ops;  // size cores.size() - 1
  std::vector<OrderTerm> order_by;
  ExprPtr limit;
  ExprPtr offset;
};

struct ParseFailure {
  std::string message;
  Token at;
};

struct ParsedStatement {
  // Upper-cased leading keyword: SELECT, WITH, VALUES, DELETE, DROP, ...
  std::string verb;
  // Set only for read statements.
  std::shared_ptr<Select> select;
  // Byte offset one past the last significant token of the statement.
  std::size_t end_offset = 0;
};

// Splits at top-level semicolons; returns the token ranges of non-empty
// statements (each range excludes the separating ';').
std::vector<std::vector<Token>> split_statements(const std::vector<Token>& tokens);

// Parses a single statement's tokens. Non-read statements return a
// ParsedStatement with `select` unset. Throws ParseFailure.
ParsedStatement parse_statement(std::string_view sql, const std::vector<Token>& tokens);

// Bare words that may never appear in keyword position of a read query.
bool is_write_keyword(std::string_view upper_word);

}  // namespace vizgen::sql
