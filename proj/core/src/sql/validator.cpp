#include "vizgen/sql/validator.hpp"

#include "vizgen/error.hpp"
#include "vizgen/sql/parser.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace vizgen::sql {
namespace {

using Columns = std::optional<std::vector<std::string>>;  // nullopt = not knowable

constexpr std::array kStatementVerbs = {
    std::string_view{"BEGIN"},    std::string_view{"COMMIT"},    std::string_view{"END"},
    std::string_view{"ROLLBACK"}, std::string_view{"SAVEPOINT"}, std::string_view{"RELEASE"},
    std::string_view{"ANALYZE"},  std::string_view{"EXPLAIN"},   std::string_view{"SET"},
    std::string_view{"USE"},      std::string_view{"SHOW"},      std::string_view{"DECLARE"},
    std::string_view{"EXEC"},     std::string_view{"EXECUTE"},   std::string_view{"LOCK"},
    std::string_view{"UNLOCK"},   std::string_view{"COPY"},      std::string_view{"LOAD"},
    std::string_view{"RENAME"},   std::string_view{"COMMENT"},   std::string_view{"DO"},
    std::string_view{"PREPARE"},  std::string_view{"LISTEN"},    std::string_view{"NOTIFY"},
    std::string_view{"REFRESH"},  std::string_view{"CLUSTER"},   std::string_view{"DISCARD"},
    std::string_view{"OPTIMIZE"}, std::string_view{"FLUSH"},     std::string_view{"KILL"},
    std::string_view{"SHUTDOWN"}, std::string_view{"BACKUP"},    std::string_view{"RESTORE"},
};

constexpr std::array kUnsafeFunctions = {
    std::string_view{"load_extension"}, std::string_view{"readfile"},
    std::string_view{"writefile"},      std::string_view{"edit"},
    std::string_view{"fts3_tokenizer"},
};

constexpr std::array kTableFunctions = {
    std::string_view{"json_each"},
    std::string_view{"json_tree"},
    std::string_view{"generate_series"},
};

bool contains_ci(const std::vector<std::string>& names, std::string_view name) {
  return std::any_of(names.begin(), names.end(),
                     [&](const std::string& n) { return iequals(n, name); });
}

bool is_rowid(std::string_view name) {
  return iequals(name, "rowid") || iequals(name, "oid") || iequals(name, "_rowid_");
}

struct Source {
  std::string alias;
  std::string table;
  Columns columns;
  bool base_table = false;
};

struct Scope {
  const Scope* parent = nullptr;
  std::vector<Source> sources;
  std::vector<std::string> aliases;
  bool aliases_visible = false;
};

struct Cte {
  std::string name;
  Columns columns;
};

class Resolver {
 public:
  Resolver(std::string_view sql, const SchemaSnapshot& snapshot) : sql_(sql), snapshot_(snapshot) {}

  Columns select(const Select& s, const Scope* outer) {
    const std::size_t mark = ctes_.size();
    for (const auto& cte : s.ctes) {
      Columns declared;
      if (!cte.columns.empty()) declared = cte.columns;
      if (s.recursive) {
        ctes_.push_back({cte.name, declared});
        Columns body = select(*cte.select, outer);
        ctes_.back().columns = declared ? declared : body;
      } else {
        Columns body = select(*cte.select, outer);
        ctes_.push_back({cte.name, declared ? declared : body});
      }
    }

    Columns outputs;
    Scope last_scope;
    for (std::size_t i = 0; i < s.cores.size(); ++i) {
      Scope scope;
      scope.parent = outer;
      Columns out = core(s.cores[i], scope);
      if (i == 0) outputs = out;
      last_scope = std::move(scope);
    }

    if (!s.order_by.empty()) {
      if (s.cores.size() == 1) {
        last_scope.aliases_visible = true;
        for (const auto& term : s.order_by) expr(*term.expr, last_scope);
      } else {
        Scope compound;
        compound.parent = outer;
        compound.sources.push_back({"", "", outputs, false});
        for (const auto& term : s.order_by) expr(*term.expr, compound);
      }
    }
    Scope limit_scope;
    limit_scope.parent = outer;
    if (s.limit) expr(*s.limit, limit_scope);
    if (s.offset) expr(*s.offset, limit_scope);

    ctes_.resize(mark);
    return outputs;
  }

  std::vector<std::string> warnings;
  std::vector<std::string> tables;

 private:
  Columns core(const SelectCore& c, Scope& scope) {
    if (c.is_values) {
      std::vector<std::string> names;
      for (const auto& row : c.values) {
        for (const auto& e : row) expr(*e, scope);
      }
      const std::size_t width = c.values.empty() ? 0 : c.values.front().size();
      for (std::size_t i = 1; i <= width; ++i) names.push_back("column" + std::to_string(i));
      return names;
    }

    for (const auto& item : c.from) {
      Source src;
      src.alias = item.effective_name();
      switch (item.kind) {
        case FromItem::Kind::Table:
          src.table = item.name;
          src.columns = table_columns(item);
          src.base_table = true;
          break;
        case FromItem::Kind::Subquery:
          src.columns = select(*item.subquery, scope.parent);
          break;
        case FromItem::Kind::TableFunction: {
          const std::string fn = to_lower(item.name);
          if (fn.rfind("pragma_", 0) == 0) {
            throw Error(ErrorCode::ReadOnlyViolation, "pragma table functions are not allowed",
                        "PRAGMA");
          }
          if (std::find(kTableFunctions.begin(), kTableFunctions.end(), fn) ==
              kTableFunctions.end()) {
            throw Error(ErrorCode::UnknownTable, "unknown table-valued function", item.name);
          }
          for (const auto& arg : item.function_args) expr(*arg, scope);
          break;
        }
      }
      scope.sources.push_back(std::move(src));

      if (item.join != JoinKind::First) {
        const bool constrained = item.on || !item.using_columns.empty() || item.natural;
        if (!constrained && (item.join != JoinKind::Comma || !c.where)) {
          if (std::find(warnings.begin(), warnings.end(), kCartesianWarning) == warnings.end()) {
            warnings.emplace_back(kCartesianWarning);
          }
        }
        if (item.on) expr(*item.on, scope);
        for (const auto& col : item.using_columns) {
          const Source& right = scope.sources.back();
          if (right.columns && !contains_ci(*right.columns, col)) {
            throw Error(ErrorCode::UnknownColumn, "USING column not found", col);
          }
        }
      }
    }

    std::vector<std::string> outputs;
    bool outputs_known = true;
    for (const auto& rc : c.columns) {
      if (rc.star) {
        if (scope.sources.empty()) {
          throw Error(ErrorCode::ParseError, "'*' used without a FROM clause");
        }
        if (!rc.star_qualifier.empty()) {
          const Source* src = find_source(scope, rc.star_qualifier);
          if (src == nullptr) throw Error(ErrorCode::UnknownTable, "unknown table alias", rc.star_qualifier);
          if (src->columns) {
            outputs.insert(outputs.end(), src->columns->begin(), src->columns->end());
          } else {
            outputs_known = false;
          }
        } else {
          for (const auto& src : scope.sources) {
            if (src.columns) {
              outputs.insert(outputs.end(), src.columns->begin(), src.columns->end());
            } else {
              outputs_known = false;
            }
          }
        }
        continue;
      }
      expr(*rc.expr, scope);
      if (!rc.alias.empty()) {
        outputs.push_back(rc.alias);
        scope.aliases.push_back(rc.alias);
      } else if (rc.expr->kind == Expr::Kind::Column) {
        outputs.push_back(rc.expr->name);
      } else {
        outputs.emplace_back(sql_.substr(rc.expr->begin, rc.expr->end - rc.expr->begin));
      }
    }

    scope.aliases_visible = true;
    if (c.where) expr(*c.where, scope);
    for (const auto& g : c.group_by) expr(*g, scope);
    if (c.having) expr(*c.having, scope);

    if (!outputs_known) return std::nullopt;
    return outputs;
  }

  Columns table_columns(const FromItem& item) {
    if (item.schema.empty()) {
      for (auto it = ctes_.rbegin(); it != ctes_.rend(); ++it) {
        if (iequals(it->name, item.name)) return it->columns;
      }
    } else if (!iequals(item.schema, "main")) {
      throw Error(ErrorCode::UnknownTable, "unknown schema", item.schema + "." + item.name);
    }
    const TableMeta* meta = snapshot_.find_table(item.name);
    if (meta == nullptr) throw Error(ErrorCode::UnknownTable, "table not in schema", item.name);
    if (!contains_ci(tables, meta->name)) tables.push_back(meta->name);
    std::vector<std::string> names;
    names.reserve(meta->columns.size());
    for (const auto& col : meta->columns) names.push_back(col.name);
    return names;
  }

  static const Source* find_source(const Scope& scope, std::string_view qualifier) {
    for (const auto& src : scope.sources) {
      if (iequals(src.alias, qualifier)) return &src;
    }
    for (const auto& src : scope.sources) {
      if (!src.table.empty() && iequals(src.table, qualifier)) return &src;
    }
    return nullptr;
  }

  void column(const Expr& e, const Scope& scope) {
    if (!e.qualifier.empty()) {
      for (const Scope* s = &scope; s != nullptr; s = s->parent) {
        const Source* src = find_source(*s, e.qualifier);
        if (src == nullptr) continue;
        if (src->columns && !contains_ci(*src->columns, e.name) &&
            !(src->base_table && is_rowid(e.name))) {
          throw Error(ErrorCode::UnknownColumn, "column not found", e.qualifier + "." + e.name);
        }
        return;
      }
      throw Error(ErrorCode::UnknownTable, "unknown table or alias", e.qualifier);
    }
    for (const Scope* s = &scope; s != nullptr; s = s->parent) {
      for (const auto& src : s->sources) {
        if (!src.columns || contains_ci(*src.columns, e.name)) return;
      }
      if (s->aliases_visible && contains_ci(s->aliases, e.name)) return;
      if (is_rowid(e.name) &&
          std::any_of(s->sources.begin(), s->sources.end(),
                      [](const Source& src) { return src.base_table; })) {
        return;
      }
    }
    throw Error(ErrorCode::UnknownColumn, "column not found", e.name);
  }

  void expr(const Expr& e, const Scope& scope) {
    switch (e.kind) {
      case Expr::Kind::Column:
        column(e, scope);
        break;
      case Expr::Kind::Star:
        if (!e.qualifier.empty() && find_source(scope, e.qualifier) == nullptr) {
          throw Error(ErrorCode::UnknownTable, "unknown table alias", e.qualifier);
        }
        break;
      case Expr::Kind::Function: {
        const std::string fn = to_lower(e.text);
        if (std::find(kUnsafeFunctions.begin(), kUnsafeFunctions.end(), fn) !=
            kUnsafeFunctions.end()) {
          throw Error(ErrorCode::ReadOnlyViolation, "function is not allowed", to_upper(fn));
        }
        break;
      }
      default:
        break;
    }
    for (const auto& child : e.children) expr(*child, scope);
    if (e.subquery) select(*e.subquery, &scope);
  }

  std::string_view sql_;
  const SchemaSnapshot& snapshot_;
  std::vector<Cte> ctes_;
};

struct Analysis {
  ParsedStatement parsed;
  std::vector<std::string> tables;
  std::vector<std::string> warnings;
};

Analysis analyze(std::string_view sql, const SchemaSnapshot& snapshot) {
  std::vector<Token> tokens;
  try {
    tokens = tokenize(sql);
  } catch (const LexError& e) {
    throw Error(ErrorCode::ParseError, e.message + " at offset " + std::to_string(e.offset));
  }
  const auto statements = split_statements(tokens);
  if (statements.empty()) throw Error(ErrorCode::ParseError, "empty query");
  if (statements.size() > 1) {
    throw Error(ErrorCode::MultipleStatements,
                "expected one statement, found " + std::to_string(statements.size()));
  }

  Analysis out;
  try {
    out.parsed = parse_statement(sql, statements.front());
  } catch (const ParseFailure& f) {
    if (f.at.kind == TokenKind::Word && is_write_keyword(f.at.upper)) {
      throw Error(ErrorCode::ReadOnlyViolation, "write keyword in query", f.at.upper);
    }
    throw Error(ErrorCode::ParseError,
                f.message + " at offset " + std::to_string(f.at.offset));
  }
  if (!out.parsed.select) {
    const std::string& verb = out.parsed.verb;
    if (is_write_keyword(verb) ||
        std::find(kStatementVerbs.begin(), kStatementVerbs.end(), verb) != kStatementVerbs.end()) {
      throw Error(ErrorCode::ReadOnlyViolation, "only SELECT queries are allowed", verb);
    }
    throw Error(ErrorCode::ParseError, "not a query: " + verb);
  }

  Resolver resolver(sql, snapshot);
  resolver.select(*out.parsed.select, nullptr);
  out.tables = std::move(resolver.tables);
  out.warnings = std::move(resolver.warnings);
  return out;
}

}  // namespace

ValidatedSql validate_sql(std::string_view sql, const SchemaSnapshot& snapshot,
                          std::int64_t default_limit) {
  if (default_limit < 1) throw Error(ErrorCode::InvalidArgument, "default_limit must be >= 1");
  Analysis a = analyze(sql, snapshot);
  ValidatedSql out;
  out.sql = std::string(sql.substr(0, a.parsed.end_offset));
  out.warnings = std::move(a.warnings);
  if (!a.parsed.select->limit) {
    out.sql += " LIMIT " + std::to_string(default_limit);
    out.injected_limit = default_limit;
  }
  return out;
}

ValidatedSql validate_sql(const SqlPlan& plan, const SchemaSnapshot& snapshot,
                          std::int64_t default_limit) {
  if (plan.raw_sql.empty()) throw Error(ErrorCode::ParseError, "empty query");
  ValidatedSql out = validate_sql(plan.raw_sql, snapshot, default_limit);
  for (const auto& t : plan.referenced_tables) {
    if (snapshot.find_table(t) == nullptr) {
      throw Error(ErrorCode::UnknownTable, "plan references a table not in schema", t);
    }
  }
  return out;
}

std::vector<std::string> referenced_tables(std::string_view sql, const SchemaSnapshot& snapshot) {
  return analyze(sql, snapshot).tables;
}

}  // namespace vizgen::sql
