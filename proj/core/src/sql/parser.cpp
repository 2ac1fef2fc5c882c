#include "vizgen/sql/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace vizgen::sql {
namespace {

constexpr std::array kWriteKeywords = {
    std::string_view{"INSERT"}, std::string_view{"UPDATE"},   std::string_view{"DELETE"},
    std::string_view{"DROP"},   std::string_view{"ALTER"},    std::string_view{"CREATE"},
    std::string_view{"TRUNCATE"}, std::string_view{"GRANT"},  std::string_view{"REVOKE"},
    std::string_view{"ATTACH"}, std::string_view{"PRAGMA"},   std::string_view{"CALL"},
    std::string_view{"MERGE"},  std::string_view{"REPLACE"},  std::string_view{"DETACH"},
    std::string_view{"VACUUM"}, std::string_view{"REINDEX"},  std::string_view{"UPSERT"},
};

// Words that terminate an expression or cannot start a bare identifier.
constexpr std::array kReserved = {
    std::string_view{"SELECT"},  std::string_view{"FROM"},      std::string_view{"WHERE"},
    std::string_view{"GROUP"},   std::string_view{"BY"},        std::string_view{"HAVING"},
    std::string_view{"ORDER"},   std::string_view{"LIMIT"},     std::string_view{"OFFSET"},
    std::string_view{"UNION"},   std::string_view{"INTERSECT"}, std::string_view{"EXCEPT"},
    std::string_view{"JOIN"},    std::string_view{"ON"},        std::string_view{"USING"},
    std::string_view{"AS"},      std::string_view{"LEFT"},      std::string_view{"RIGHT"},
    std::string_view{"FULL"},    std::string_view{"INNER"},     std::string_view{"OUTER"},
    std::string_view{"CROSS"},   std::string_view{"NATURAL"},   std::string_view{"AND"},
    std::string_view{"OR"},      std::string_view{"NOT"},       std::string_view{"IN"},
    std::string_view{"IS"},      std::string_view{"NULL"},      std::string_view{"LIKE"},
    std::string_view{"GLOB"},    std::string_view{"REGEXP"},    std::string_view{"MATCH"},
    std::string_view{"BETWEEN"}, std::string_view{"CASE"},      std::string_view{"WHEN"},
    std::string_view{"THEN"},    std::string_view{"ELSE"},      std::string_view{"END"},
    std::string_view{"EXISTS"},  std::string_view{"DISTINCT"},  std::string_view{"ALL"},
    std::string_view{"WITH"},    std::string_view{"CAST"},      std::string_view{"ESCAPE"},
    std::string_view{"COLLATE"}, std::string_view{"WINDOW"},    std::string_view{"VALUES"},
    std::string_view{"ISNULL"},  std::string_view{"NOTNULL"},   std::string_view{"INDEXED"},
    std::string_view{"OVER"},    std::string_view{"FILTER"},    std::string_view{"ASC"},
    std::string_view{"DESC"},    std::string_view{"NULLS"},     std::string_view{"INTO"},
    std::string_view{"SET"},     std::string_view{"TABLE"},
};

bool is_reserved(std::string_view upper) {
  return std::find(kReserved.begin(), kReserved.end(), upper) != kReserved.end() ||
         is_write_keyword(upper);
}

std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '$';
}

class Parser {
 public:
  Parser(std::string_view sql, const std::vector<Token>& tokens) : sql_(sql), tokens_(tokens) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End) {
      tokens_.push_back(Token{TokenKind::End, "", "", sql.size(), 0});
    }
  }

  ParsedStatement statement() {
    ParsedStatement out;
    const Token& first = peek();
    if (first.kind != TokenKind::Word) fail("expected a statement keyword");
    out.verb = first.upper;
    if (first.upper != "SELECT" && first.upper != "WITH" && first.upper != "VALUES") {
      out.end_offset = tokens_.size() >= 2 ? end_of(tokens_[tokens_.size() - 2]) : 0;
      return out;
    }
    out.select = select();
    if (peek().kind != TokenKind::End) fail("unexpected token after end of query");
    out.end_offset = last_end_;
    return out;
  }

 private:
  static std::size_t end_of(const Token& t) { return t.offset + t.length; }

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }

  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (t.kind != TokenKind::End) {
      last_end_ = end_of(t);
      ++pos_;
    }
    return t;
  }

  bool accept_word(std::string_view w) {
    if (peek().is_word(w)) {
      advance();
      return true;
    }
    return false;
  }

  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) {
      advance();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string message) const { throw ParseFailure{std::move(message), peek()}; }

  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail("expected " + std::string(w));
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }

  bool at_select_start() const {
    return peek().is_word("SELECT") || peek().is_word("WITH") || peek().is_word("VALUES");
  }

  // Identifier in name position (table, alias, column list).
  std::string identifier() {
    const Token& t = peek();
    if (t.kind == TokenKind::QuotedIdentifier) return advance().text;
    if (t.kind == TokenKind::Word && !is_reserved(t.upper)) return advance().text;
    fail("expected an identifier");
  }

  std::optional<std::string> optional_alias(bool allow_string) {
    if (accept_word("AS")) {
      if (allow_string && peek().kind == TokenKind::String) return advance().text;
      return identifier();
    }
    const Token& t = peek();
    if (t.kind == TokenKind::QuotedIdentifier) return advance().text;
    if (allow_string && t.kind == TokenKind::String) return advance().text;
    if (t.kind == TokenKind::Word && !is_reserved(t.upper)) return advance().text;
    return std::nullopt;
  }

  std::shared_ptr<Select> select() {
    auto s = std::make_shared<Select>();
    if (accept_word("WITH")) {
      s->recursive = accept_word("RECURSIVE");
      do {
        CommonTableExpr cte;
        cte.name = identifier();
        if (accept_punct("(")) {
          do {
            cte.columns.push_back(identifier());
          } while (accept_punct(","));
          expect_punct(")");
        }
        expect_word("AS");
        if (accept_word("NOT")) {
          expect_word("MATERIALIZED");
        } else {
          accept_word("MATERIALIZED");
        }
        expect_punct("(");
        cte.select = select();
        expect_punct(")");
        s->ctes.push_back(std::move(cte));
      } while (accept_punct(","));
      if (!peek().is_word("SELECT") && !peek().is_word("VALUES")) {
        fail("expected SELECT after WITH clause");
      }
    }
    s->cores.push_back(core());
    while (true) {
      if (accept_word("UNION")) {
        s->compound_ops.push_back(accept_word("ALL") ? "UNION ALL" : "UNION");
      } else if (accept_word("INTERSECT")) {
        s->compound_ops.push_back("INTERSECT");
      } else if (accept_word("EXCEPT")) {
        s->compound_ops.push_back("EXCEPT");
      } else {
        break;
      }
      s->cores.push_back(core());
    }
    if (accept_word("ORDER")) {
      expect_word("BY");
      s->order_by = order_terms();
    }
    if (accept_word("LIMIT")) {
      s->limit = expr();
      if (accept_word("OFFSET") || accept_punct(",")) s->offset = expr();
    }
    return s;
  }

  std::vector<OrderTerm> order_terms() {
    std::vector<OrderTerm> terms;
    do {
      OrderTerm term;
      term.expr = expr();
      if (accept_word("DESC")) {
        term.descending = true;
      } else {
        accept_word("ASC");
      }
      if (accept_word("NULLS")) {
        if (!accept_word("FIRST")) expect_word("LAST");
      }
      terms.push_back(std::move(term));
    } while (accept_punct(","));
    return terms;
  }

  SelectCore core() {
    SelectCore c;
    if (accept_word("VALUES")) {
      c.is_values = true;
      do {
        expect_punct("(");
        std::vector<ExprPtr> row;
        do {
          row.push_back(expr());
        } while (accept_punct(","));
        expect_punct(")");
        c.values.push_back(std::move(row));
      } while (accept_punct(","));
      return c;
    }
    expect_word("SELECT");
    if (accept_word("DISTINCT")) {
      c.distinct = true;
    } else {
      accept_word("ALL");
    }
    do {
      c.columns.push_back(result_column());
    } while (accept_punct(","));
    if (accept_word("FROM")) from_clause(c.from);
    if (accept_word("WHERE")) c.where = expr();
    if (accept_word("GROUP")) {
      expect_word("BY");
      do {
        c.group_by.push_back(expr());
      } while (accept_punct(","));
    }
    if (accept_word("HAVING")) c.having = expr();
    if (accept_word("WINDOW")) {
      do {
        identifier();
        expect_word("AS");
        window_definition();
      } while (accept_punct(","));
    }
    return c;
  }

  ResultColumnExpr result_column() {
    ResultColumnExpr rc;
    if (accept_punct("*")) {
      rc.star = true;
      return rc;
    }
    const Token& t = peek();
    if ((t.kind == TokenKind::Word || t.kind == TokenKind::QuotedIdentifier) &&
        peek(1).is_punct(".") && peek(2).is_punct("*")) {
      rc.star = true;
      rc.star_qualifier = advance().text;
      advance();
      advance();
      return rc;
    }
    rc.expr = expr();
    if (auto alias = optional_alias(true)) rc.alias = *alias;
    return rc;
  }

  void from_clause(std::vector<FromItem>& items) {
    items.push_back(from_item(JoinKind::First, false));
    while (true) {
      bool natural = false;
      JoinKind kind;
      if (accept_punct(",")) {
        kind = JoinKind::Comma;
      } else {
        natural = accept_word("NATURAL");
        if (accept_word("LEFT")) {
          accept_word("OUTER");
          kind = JoinKind::Left;
        } else if (accept_word("RIGHT")) {
          accept_word("OUTER");
          kind = JoinKind::Right;
        } else if (accept_word("FULL")) {
          accept_word("OUTER");
          kind = JoinKind::Full;
        } else if (accept_word("INNER")) {
          kind = JoinKind::Inner;
        } else if (accept_word("CROSS")) {
          kind = JoinKind::Cross;
        } else {
          kind = JoinKind::Inner;
          if (!peek().is_word("JOIN")) {
            if (natural) fail("expected JOIN after NATURAL");
            return;
          }
        }
        expect_word("JOIN");
      }
      const std::size_t before = items.size();
      items.push_back(from_item(kind, natural));
      FromItem& joined = items[before];
      if (accept_word("ON")) {
        joined.on = expr();
      } else if (accept_word("USING")) {
        expect_punct("(");
        do {
          joined.using_columns.push_back(identifier());
        } while (accept_punct(","));
        expect_punct(")");
      }
    }
  }

  FromItem from_item(JoinKind kind, bool natural) {
    FromItem item;
    item.join = kind;
    item.natural = natural;
    if (accept_punct("(")) {
      if (at_select_start()) {
        item.kind = FromItem::Kind::Subquery;
        item.subquery = select();
        expect_punct(")");
        if (auto alias = optional_alias(false)) item.alias = *alias;
        return item;
      }
      // Parenthesised join: flatten it into a subquery-free derived source.
      auto inner = std::make_shared<Select>();
      SelectCore core;
      ResultColumnExpr star;
      star.star = true;
      core.columns.push_back(std::move(star));
      from_clause(core.from);
      expect_punct(")");
      inner->cores.push_back(std::move(core));
      item.kind = FromItem::Kind::Subquery;
      item.subquery = std::move(inner);
      if (auto alias = optional_alias(false)) item.alias = *alias;
      return item;
    }
    std::string first = identifier();
    if (accept_punct(".")) {
      item.schema = std::move(first);
      item.name = identifier();
    } else {
      item.name = std::move(first);
    }
    if (accept_punct("(")) {
      item.kind = FromItem::Kind::TableFunction;
      if (!peek().is_punct(")")) {
        do {
          item.function_args.push_back(expr());
        } while (accept_punct(","));
      }
      expect_punct(")");
    }
    if (auto alias = optional_alias(false)) item.alias = *alias;
    if (accept_word("INDEXED")) {
      expect_word("BY");
      identifier();
    } else if (peek().is_word("NOT") && peek(1).is_word("INDEXED")) {
      advance();
      advance();
    }
    return item;
  }

  void window_definition() {
    expect_punct("(");
    if (peek().kind == TokenKind::Word && !is_reserved(peek().upper) &&
        !peek().is_word("PARTITION")) {
      advance();  // base window name
    }
    if (accept_word("PARTITION")) {
      expect_word("BY");
      do {
        expr();
      } while (accept_punct(","));
    }
    if (accept_word("ORDER")) {
      expect_word("BY");
      order_terms();
    }
    // Frame specification: ROWS/RANGE/GROUPS BETWEEN ... AND ... [EXCLUDE ...]
    if (peek().is_word("ROWS") || peek().is_word("RANGE") || peek().is_word("GROUPS")) {
      advance();
      auto bound = [this] {
        if (accept_word("UNBOUNDED")) {
          if (!accept_word("PRECEDING")) expect_word("FOLLOWING");
        } else if (accept_word("CURRENT")) {
          expect_word("ROW");
        } else {
          additive();
          if (!accept_word("PRECEDING")) expect_word("FOLLOWING");
        }
      };
      if (accept_word("BETWEEN")) {
        bound();
        expect_word("AND");
        bound();
      } else {
        bound();
      }
      if (accept_word("EXCLUDE")) {
        if (accept_word("NO")) {
          expect_word("OTHERS");
        } else if (accept_word("CURRENT")) {
          expect_word("ROW");
        } else if (!accept_word("GROUP")) {
          expect_word("TIES");
        }
      }
    }
    expect_punct(")");
  }

  ExprPtr make(Expr::Kind kind, std::size_t begin) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->begin = begin;
    return e;
  }

  ExprPtr finish(ExprPtr e) {
    e->end = last_end_;
    return e;
  }

  ExprPtr binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
    auto e = make(Expr::Kind::Binary, lhs->begin);
    e->text = std::move(op);
    e->children.push_back(std::move(lhs));
    e->children.push_back(std::move(rhs));
    return finish(std::move(e));
  }

 public:
  ExprPtr expr() { return or_expr(); }

 private:
  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (accept_word("OR")) lhs = binary("OR", std::move(lhs), and_expr());
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (accept_word("AND")) lhs = binary("AND", std::move(lhs), not_expr());
    return lhs;
  }

  ExprPtr not_expr() {
    if (peek().is_word("NOT")) {
      const std::size_t begin = peek().offset;
      advance();
      auto e = make(Expr::Kind::Unary, begin);
      e->text = "NOT";
      e->children.push_back(not_expr());
      return finish(std::move(e));
    }
    return comparison();
  }

  ExprPtr comparison() {
    ExprPtr lhs = relational();
    while (true) {
      const Token& t = peek();
      if (t.kind == TokenKind::Punct &&
          (t.text == "=" || t.text == "==" || t.text == "!=" || t.text == "<>")) {
        std::string op = advance().text;
        lhs = binary(std::move(op), std::move(lhs), relational());
        continue;
      }
      if (t.is_word("IS")) {
        advance();
        std::string op = "IS";
        if (accept_word("NOT")) op = "IS NOT";
        if (accept_word("DISTINCT")) {
          expect_word("FROM");
          op += " DISTINCT FROM";
        }
        lhs = binary(std::move(op), std::move(lhs), relational());
        continue;
      }
      if (t.is_word("ISNULL") || t.is_word("NOTNULL")) {
        auto e = make(Expr::Kind::Unary, lhs->begin);
        e->text = advance().upper;
        e->children.push_back(std::move(lhs));
        lhs = finish(std::move(e));
        continue;
      }
      bool negated = false;
      if (t.is_word("NOT")) {
        const Token& next = peek(1);
        if (next.is_word("NULL")) {
          advance();
          advance();
          auto e = make(Expr::Kind::Unary, lhs->begin);
          e->text = "NOTNULL";
          e->children.push_back(std::move(lhs));
          lhs = finish(std::move(e));
          continue;
        }
        if (next.is_word("IN") || next.is_word("LIKE") || next.is_word("GLOB") ||
            next.is_word("REGEXP") || next.is_word("MATCH") || next.is_word("BETWEEN")) {
          advance();
          negated = true;
        } else {
          break;
        }
      }
      const Token& op = peek();
      if (op.is_word("IN")) {
        advance();
        lhs = in_tail(std::move(lhs), negated);
      } else if (op.is_word("LIKE") || op.is_word("GLOB") || op.is_word("REGEXP") ||
                 op.is_word("MATCH")) {
        std::string name = advance().upper;
        ExprPtr rhs = relational();
        ExprPtr e = binary(std::move(name), std::move(lhs), std::move(rhs));
        e->negated = negated;
        if (accept_word("ESCAPE")) {
          e->children.push_back(relational());
          e = finish(std::move(e));
        }
        lhs = std::move(e);
      } else if (op.is_word("BETWEEN")) {
        advance();
        auto e = make(Expr::Kind::Between, lhs->begin);
        e->negated = negated;
        e->children.push_back(std::move(lhs));
        e->children.push_back(relational());
        expect_word("AND");
        e->children.push_back(relational());
        lhs = finish(std::move(e));
      } else {
        if (negated) fail("unexpected NOT");
        break;
      }
    }
    return lhs;
  }

  ExprPtr in_tail(ExprPtr lhs, bool negated) {
    const std::size_t begin = lhs->begin;
    if (accept_punct("(")) {
      if (at_select_start()) {
        auto e = make(Expr::Kind::InSelect, begin);
        e->negated = negated;
        e->children.push_back(std::move(lhs));
        e->subquery = select();
        expect_punct(")");
        return finish(std::move(e));
      }
      auto e = make(Expr::Kind::InList, begin);
      e->negated = negated;
      e->children.push_back(std::move(lhs));
      if (!peek().is_punct(")")) {
        do {
          e->children.push_back(expr());
        } while (accept_punct(","));
      }
      expect_punct(")");
      return finish(std::move(e));
    }
    // IN table-name: treat as a subquery over that table.
    auto e = make(Expr::Kind::InSelect, begin);
    e->negated = negated;
    e->children.push_back(std::move(lhs));
    auto s = std::make_shared<Select>();
    SelectCore core;
    ResultColumnExpr star;
    star.star = true;
    core.columns.push_back(std::move(star));
    FromItem item;
    item.name = identifier();
    core.from.push_back(std::move(item));
    s->cores.push_back(std::move(core));
    e->subquery = std::move(s);
    return finish(std::move(e));
  }

  ExprPtr relational() {
    ExprPtr lhs = bitwise();
    while (true) {
      const Token& t = peek();
      if (t.kind == TokenKind::Punct &&
          (t.text == "<" || t.text == "<=" || t.text == ">" || t.text == ">=")) {
        std::string op = advance().text;
        lhs = binary(std::move(op), std::move(lhs), bitwise());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr bitwise() {
    ExprPtr lhs = additive();
    while (true) {
      const Token& t = peek();
      if (t.kind == TokenKind::Punct &&
          (t.text == "&" || t.text == "|" || t.text == "<<" || t.text == ">>")) {
        std::string op = advance().text;
        lhs = binary(std::move(op), std::move(lhs), additive());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (peek().is_punct("+") || peek().is_punct("-")) {
      std::string op = advance().text;
      lhs = binary(std::move(op), std::move(lhs), multiplicative());
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = concat();
    while (peek().is_punct("*") || peek().is_punct("/") || peek().is_punct("%")) {
      std::string op = advance().text;
      lhs = binary(std::move(op), std::move(lhs), concat());
    }
    return lhs;
  }

  ExprPtr concat() {
    ExprPtr lhs = unary();
    while (peek().is_punct("||") || peek().is_punct("->") || peek().is_punct("->>")) {
      std::string op = advance().text;
      lhs = binary(std::move(op), std::move(lhs), unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    const Token& t = peek();
    if (t.is_punct("-") || t.is_punct("+") || t.is_punct("~")) {
      const std::size_t begin = t.offset;
      auto e = make(Expr::Kind::Unary, begin);
      e->text = advance().text;
      e->children.push_back(unary());
      return finish(std::move(e));
    }
    ExprPtr e = primary();
    while (accept_word("COLLATE")) {
      identifier();
      e = finish(std::move(e));
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = peek();
    const std::size_t begin = t.offset;
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String:
      case TokenKind::Blob: {
        auto e = make(Expr::Kind::Literal, begin);
        e->text = advance().text;
        return finish(std::move(e));
      }
      case TokenKind::Parameter: {
        auto e = make(Expr::Kind::Parameter, begin);
        e->text = advance().text;
        return finish(std::move(e));
      }
      case TokenKind::Punct:
        if (t.text == "(") {
          advance();
          if (at_select_start()) {
            auto e = make(Expr::Kind::Subquery, begin);
            e->subquery = select();
            expect_punct(")");
            return finish(std::move(e));
          }
          ExprPtr first = expr();
          if (accept_punct(",")) {
            auto row = make(Expr::Kind::Row, begin);
            row->children.push_back(std::move(first));
            do {
              row->children.push_back(expr());
            } while (accept_punct(","));
            expect_punct(")");
            return finish(std::move(row));
          }
          expect_punct(")");
          first->begin = begin;
          return finish(std::move(first));
        }
        fail("unexpected '" + t.text + "'");
      case TokenKind::QuotedIdentifier:
        return column_ref();
      case TokenKind::Word:
        break;
      case TokenKind::End:
        fail("unexpected end of input");
    }

    const std::string& w = t.upper;
    if (w == "NULL" || w == "TRUE" || w == "FALSE" || w == "CURRENT_DATE" ||
        w == "CURRENT_TIME" || w == "CURRENT_TIMESTAMP") {
      auto e = make(Expr::Kind::Literal, begin);
      e->text = advance().upper;
      return finish(std::move(e));
    }
    if (w == "CASE") return case_expr();
    if (w == "CAST") {
      advance();
      expect_punct("(");
      auto e = make(Expr::Kind::Cast, begin);
      e->children.push_back(expr());
      expect_word("AS");
      e->text = type_name();
      expect_punct(")");
      return finish(std::move(e));
    }
    if (w == "EXISTS") {
      advance();
      expect_punct("(");
      auto e = make(Expr::Kind::Exists, begin);
      e->subquery = select();
      expect_punct(")");
      return finish(std::move(e));
    }
    // replace(...) is an ordinary scalar function even though REPLACE is a verb.
    if (peek(1).is_punct("(") && (!is_reserved(w) || w == "REPLACE")) return function_call();
    if (is_reserved(w)) fail("unexpected keyword " + w);
    return column_ref();
  }

  std::string type_name() {
    std::string out;
    while (peek().kind == TokenKind::Word && !peek().is_punct(")")) {
      if (!out.empty()) out += ' ';
      out += advance().upper;
    }
    if (out.empty()) fail("expected a type name");
    if (accept_punct("(")) {
      out += '(';
      do {
        accept_punct("-");
        accept_punct("+");
        if (peek().kind != TokenKind::Number) fail("expected a number in type size");
        out += advance().text;
      } while (accept_punct(","));
      expect_punct(")");
      out += ')';
    }
    return out;
  }

  ExprPtr case_expr() {
    const std::size_t begin = peek().offset;
    advance();
    auto e = make(Expr::Kind::Case, begin);
    if (!peek().is_word("WHEN")) {
      e->text = "operand";
      e->children.push_back(expr());
    }
    if (!peek().is_word("WHEN")) fail("expected WHEN");
    while (accept_word("WHEN")) {
      e->children.push_back(expr());
      expect_word("THEN");
      e->children.push_back(expr());
    }
    if (accept_word("ELSE")) {
      e->negated = true;  // marks presence of an ELSE branch
      e->children.push_back(expr());
    }
    expect_word("END");
    return finish(std::move(e));
  }

  ExprPtr function_call() {
    const std::size_t begin = peek().offset;
    auto e = make(Expr::Kind::Function, begin);
    e->text = advance().text;
    expect_punct("(");
    if (accept_punct("*")) {
      auto star = make(Expr::Kind::Star, last_end_ - 1);
      e->children.push_back(finish(std::move(star)));
    } else if (!peek().is_punct(")")) {
      accept_word("DISTINCT");
      do {
        e->children.push_back(expr());
      } while (accept_punct(","));
      if (accept_word("ORDER")) {
        expect_word("BY");
        for (auto& term : order_terms()) e->children.push_back(std::move(term.expr));
      }
    }
    expect_punct(")");
    if (accept_word("FILTER")) {
      expect_punct("(");
      expect_word("WHERE");
      e->children.push_back(expr());
      expect_punct(")");
    }
    if (accept_word("OVER")) {
      if (peek().is_punct("(")) {
        window_definition();
      } else {
        identifier();
      }
    }
    return finish(std::move(e));
  }

  ExprPtr column_ref() {
    const std::size_t begin = peek().offset;
    auto e = make(Expr::Kind::Column, begin);
    std::vector<std::pair<std::string, bool>> parts;
    auto part = [&] {
      const Token& t = peek();
      if (t.kind == TokenKind::QuotedIdentifier) {
        parts.emplace_back(advance().text, true);
      } else if (t.kind == TokenKind::Word && !is_reserved(t.upper)) {
        parts.emplace_back(advance().text, false);
      } else {
        fail("expected a column name");
      }
    };
    part();
    while (peek().is_punct(".")) {
      if (peek(1).is_punct("*")) {
        advance();
        advance();
        e->kind = Expr::Kind::Star;
        e->qualifier = parts.back().first;
        return finish(std::move(e));
      }
      advance();
      part();
    }
    if (parts.size() > 3) fail("too many name qualifiers");
    e->name = parts.back().first;
    e->quoted = parts.back().second;
    if (parts.size() >= 2) e->qualifier = parts[parts.size() - 2].first;
    return finish(std::move(e));
  }

  std::string_view sql_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
};

}  // namespace

bool is_write_keyword(std::string_view upper_word) {
  return std::find(kWriteKeywords.begin(), kWriteKeywords.end(), upper_word) !=
         kWriteKeywords.end();
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  auto push = [&](TokenKind kind, std::string text, std::size_t start) {
    Token t;
    t.kind = kind;
    t.offset = start;
    t.length = i - start;
    if (kind == TokenKind::Word) t.upper = to_upper_ascii(text);
    t.text = std::move(text);
    out.push_back(std::move(t));
  };
  while (i < n) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const auto close = sql.find("*/", i + 2);
      if (close == std::string_view::npos) throw LexError{"unterminated comment", start};
      i = close + 2;
      continue;
    }
    if ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'') {
      i += 2;
      while (i < n && sql[i] != '\'') ++i;
      if (i >= n) throw LexError{"unterminated blob literal", start};
      ++i;
      push(TokenKind::Blob, std::string(sql.substr(start, i - start)), start);
      continue;
    }
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(sql[i])) ++i;
      push(TokenKind::Word, std::string(sql.substr(start, i - start)), start);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
        i += 2;
        while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
      } else {
        while (i < n && (std::isdigit(static_cast<unsigned char>(sql[i])) || sql[i] == '_')) ++i;
        if (i < n && sql[i] == '.') {
          ++i;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
        if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
          std::size_t j = i + 1;
          if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
          if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
            i = j;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
          }
        }
      }
      if (i < n && is_ident_start(sql[i])) throw LexError{"malformed number", start};
      push(TokenKind::Number, std::string(sql.substr(start, i - start)), start);
      continue;
    }
    if (c == '\'' || c == '"' || c == '`') {
      const char quote = c;
      std::string value;
      ++i;
      bool closed = false;
      while (i < n) {
        if (sql[i] == quote) {
          if (i + 1 < n && sql[i + 1] == quote) {
            value.push_back(quote);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value.push_back(sql[i++]);
      }
      if (!closed) throw LexError{"unterminated quoted text", start};
      push(quote == '\'' ? TokenKind::String : TokenKind::QuotedIdentifier, std::move(value), start);
      continue;
    }
    if (c == '[') {
      const auto close = sql.find(']', i + 1);
      if (close == std::string_view::npos) throw LexError{"unterminated [identifier]", start};
      std::string value(sql.substr(i + 1, close - i - 1));
      i = close + 1;
      push(TokenKind::QuotedIdentifier, std::move(value), start);
      continue;
    }
    if (c == '?' || c == ':' || c == '@' || c == '$') {
      ++i;
      while (i < n && (is_ident_char(sql[i]))) ++i;
      push(TokenKind::Parameter, std::string(sql.substr(start, i - start)), start);
      continue;
    }
    static constexpr std::array<std::string_view, 12> kMulti = {
        "->>", "||", "->", "<=", ">=", "<>", "!=", "==", "<<", ">>", "::", "**"};
    bool matched = false;
    for (const auto op : kMulti) {
      if (sql.substr(i, op.size()) == op) {
        i += op.size();
        push(TokenKind::Punct, std::string(op), start);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr std::string_view kSingle = "(),.;*/%+-<>=&|~";
    if (kSingle.find(c) != std::string_view::npos) {
      ++i;
      push(TokenKind::Punct, std::string(1, c), start);
      continue;
    }
    throw LexError{std::string("unexpected character '") + c + "'", start};
  }
  Token end;
  end.kind = TokenKind::End;
  end.offset = n;
  out.push_back(std::move(end));
  return out;
}

std::vector<std::vector<Token>> split_statements(const std::vector<Token>& tokens) {
  std::vector<std::vector<Token>> out;
  std::vector<Token> current;
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::End || t.is_punct(";")) {
      if (!current.empty()) {
        Token end;
        end.kind = TokenKind::End;
        end.offset = t.offset;
        current.push_back(std::move(end));
        out.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    current.push_back(t);
  }
  return out;
}

ParsedStatement parse_statement(std::string_view sql, const std::vector<Token>& tokens) {
  Parser parser(sql, tokens);
  return parser.statement();
}

}  // namespace vizgen::sql
