#include "vizgen/sql/database.hpp"

#include "vizgen/error.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <set>
#include <unistd.h>

namespace vizgen::sql {
namespace {

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

class SqliteConnection final : public Connection {
 public:
  explicit SqliteConnection(const ConnectionConfig& config) : config_(config) {
    const std::string& path = config.location;
    const bool uri = path.rfind("file:", 0) == 0;
    if (!uri && ::access(path.c_str(), F_OK) != 0) {
      throw Error(ErrorCode::ConnectionFailed, "database file not found: " + redact_location(path));
    }
    if (!uri && ::access(path.c_str(), R_OK) != 0) {
      throw Error(ErrorCode::PermissionDenied, "database file not readable: " + redact_location(path));
    }
    int flags = SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX;
    if (uri) flags |= SQLITE_OPEN_URI;
    sqlite3* db = nullptr;
    const int rc = sqlite3_open_v2(path.c_str(), &db, flags, nullptr);
    db_.reset(db);
    if (rc != SQLITE_OK) {
      const std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
      throw Error(ErrorCode::ConnectionFailed, msg + ": " + redact_location(path));
    }
    sqlite3_db_config(db_.get(), SQLITE_DBCONFIG_ENABLE_LOAD_EXTENSION, 0, nullptr);
    sqlite3_exec(db_.get(), "PRAGMA query_only = 1", nullptr, nullptr, nullptr);
    // Touch the schema so that non-database files fail here, not later.
    char* err = nullptr;
    if (sqlite3_exec(db_.get(), "SELECT count(*) FROM sqlite_master", nullptr, nullptr, &err) !=
        SQLITE_OK) {
      std::string msg = err ? err : "unreadable database";
      sqlite3_free(err);
      throw Error(ErrorCode::ConnectionFailed, msg + ": " + redact_location(path));
    }
  }

  SchemaSnapshot introspect(const Clock& clock) override {
    const DialectAdapter& adapter = adapter_for(Dialect::Embedded);
    SchemaSnapshot snap;
    for (const auto& row : query_rows(
             "SELECT name, type FROM sqlite_master WHERE type IN ('table','view') "
             "AND name NOT LIKE 'sqlite_%' ORDER BY name")) {
      TableMeta table;
      table.name = std::get<std::string>(row[0]);
      const bool is_view = std::get<std::string>(row[1]) == "view";
      const std::string qname = adapter.quote_identifier(table.name);

      std::vector<std::pair<std::int64_t, std::string>> pk;
      for (const auto& col : query_rows("PRAGMA table_info(" + qname + ")")) {
        ColumnMeta meta;
        meta.name = std::get<std::string>(col[1]);
        meta.declared_type = is_null(col[2]) ? "" : display(col[2]);
        table.columns.push_back(std::move(meta));
        if (const auto* k = std::get_if<std::int64_t>(&col[5]); k && *k > 0) {
          pk.emplace_back(*k, std::get<std::string>(col[1]));
        }
      }
      if (!pk.empty()) {
        std::sort(pk.begin(), pk.end());
        std::vector<std::string> names;
        for (auto& [_, n] : pk) names.push_back(n);
        table.primary_key = std::move(names);
      }
      if (!is_view) {
        for (const auto& fk : query_rows("PRAGMA foreign_key_list(" + qname + ")")) {
          ForeignKey key;
          key.ref_table = std::get<std::string>(fk[2]);
          key.column = std::get<std::string>(fk[3]);
          key.ref_column = is_null(fk[4]) ? std::string{} : std::get<std::string>(fk[4]);
          table.foreign_keys.push_back(std::move(key));
        }
      }
      table.row_count = std::get<std::int64_t>(query_rows("SELECT count(*) FROM " + qname)[0][0]);

      std::string order_by;
      if (table.primary_key) {
        for (const auto& k : *table.primary_key) {
          order_by += (order_by.empty() ? "" : ", ") + adapter.quote_identifier(k);
        }
      } else if (!is_view) {
        order_by = "rowid";
      }
      for (auto& col : table.columns) {
        const std::string qcol = adapter.quote_identifier(col.name);
        const auto distinct = std::get<std::int64_t>(
            query_rows("SELECT count(DISTINCT " + qcol + ") FROM " + qname)[0][0]);
        col.semantic_type = adapter.map_type(col.declared_type, static_cast<std::size_t>(distinct),
                                             static_cast<std::size_t>(table.row_count));
        std::string sample_sql = "SELECT " + qcol + " FROM " + qname + " WHERE " + qcol +
                                 " IS NOT NULL";
        if (!order_by.empty()) sample_sql += " ORDER BY " + order_by;
        sample_sql += " LIMIT 5";
        for (const auto& s : query_rows(sample_sql)) col.sample_values.push_back(display(s[0]));
      }
      snap.tables.push_back(std::move(table));
    }
    // Foreign keys that name only the referenced table point at its primary key.
    for (auto& table : snap.tables) {
      for (auto& fk : table.foreign_keys) {
        if (!fk.ref_column.empty()) continue;
        if (const TableMeta* ref = snap.find_table(fk.ref_table); ref && ref->primary_key) {
          fk.ref_column = ref->primary_key->front();
        }
      }
      std::erase_if(table.foreign_keys, [&](const ForeignKey& fk) {
        const TableMeta* ref = snap.find_table(fk.ref_table);
        return ref == nullptr || ref->find_column(fk.ref_column) == nullptr;
      });
    }
    snap.fetched_at = clock.now();
    return snap;
  }

  ResultTable execute(const ValidatedSql& query, std::int64_t row_cap,
                      std::int64_t deadline_ms) override {
    if (row_cap < 1) throw Error(ErrorCode::InvalidArgument, "row_cap must be >= 1");
    Guard guard(db_.get(), std::chrono::steady_clock::now() + std::chrono::milliseconds(deadline_ms));

    sqlite3_stmt* raw = nullptr;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db_.get(), query.sql.c_str(), -1, &raw, &tail);
    Statement stmt(raw);
    if (rc != SQLITE_OK) fail(rc, guard);
    if (!stmt || !sqlite3_stmt_readonly(stmt.get())) {
      throw Error(ErrorCode::ExecutionFailed, "statement is not read-only");
    }
    if (tail != nullptr && std::string_view(tail).find_first_not_of(" \t\r\n;") != std::string_view::npos) {
      throw Error(ErrorCode::ExecutionFailed, "trailing statement text");
    }

    ResultTable table;
    table.source_sql = query.sql;
    const int ncols = sqlite3_column_count(stmt.get());
    std::vector<std::string> declared(static_cast<std::size_t>(ncols));
    for (int i = 0; i < ncols; ++i) {
      table.columns.push_back({sqlite3_column_name(stmt.get(), i), SemanticType::Unknown});
      const char* decl = sqlite3_column_decltype(stmt.get(), i);
      declared[static_cast<std::size_t>(i)] = decl ? decl : "";
    }
    while (true) {
      rc = sqlite3_step(stmt.get());
      if (rc == SQLITE_DONE) break;
      if (rc != SQLITE_ROW) fail(rc, guard);
      if (static_cast<std::int64_t>(table.rows.size()) >= row_cap) {
        table.truncated = true;
        break;
      }
      table.rows.push_back(read_row(stmt.get(), ncols));
    }
    if (query.injected_limit &&
        static_cast<std::int64_t>(table.rows.size()) >= *query.injected_limit) {
      table.truncated = true;
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const auto values = table.column_values(i);
      table.columns[i].semantic_type = infer_semantic_type(values, declared[i]);
    }
    return table;
  }

 private:
  struct DbCloser {
    void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
  };
  struct StmtFinalizer {
    void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
  };
  using Statement = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

  // Installs the deadline and the read-only authorizer for one execution.
  struct Guard {
    Guard(sqlite3* db, std::chrono::steady_clock::time_point deadline)
        : db(db), deadline(deadline) {
      sqlite3_progress_handler(db, 1000, &Guard::on_progress, this);
      sqlite3_set_authorizer(db, &Guard::authorize, nullptr);
    }
    ~Guard() {
      sqlite3_progress_handler(db, 0, nullptr, nullptr);
      sqlite3_set_authorizer(db, nullptr, nullptr);
    }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

    static int on_progress(void* self) {
      auto* g = static_cast<Guard*>(self);
      if (std::chrono::steady_clock::now() >= g->deadline) {
        g->timed_out = true;
        return 1;
      }
      return 0;
    }

    static int authorize(void*, int action, const char* a, const char*, const char*, const char*) {
      switch (action) {
        case SQLITE_SELECT:
        case SQLITE_READ:
        case SQLITE_RECURSIVE:
          return SQLITE_OK;
        case SQLITE_FUNCTION: {
          const std::string fn = a ? to_lower(a) : "";
          return fn == "load_extension" || fn == "readfile" || fn == "writefile" || fn == "edit"
                     ? SQLITE_DENY
                     : SQLITE_OK;
        }
        default:
          return SQLITE_DENY;
      }
    }

    sqlite3* db;
    std::chrono::steady_clock::time_point deadline;
    bool timed_out = false;
  };

  [[noreturn]] void fail(int rc, const Guard& guard) {
    if (rc == SQLITE_INTERRUPT || guard.timed_out) {
      throw Error(ErrorCode::ExecutionTimeout, "query exceeded its deadline");
    }
    throw Error(ErrorCode::ExecutionFailed, sqlite3_errmsg(db_.get()));
  }

  static std::vector<Value> read_row(sqlite3_stmt* stmt, int ncols) {
    std::vector<Value> row;
    row.reserve(static_cast<std::size_t>(ncols));
    for (int i = 0; i < ncols; ++i) {
      switch (sqlite3_column_type(stmt, i)) {
        case SQLITE_INTEGER:
          row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt, i)));
          break;
        case SQLITE_FLOAT:
          row.emplace_back(sqlite3_column_double(stmt, i));
          break;
        case SQLITE_TEXT:
          row.emplace_back(std::string(reinterpret_cast<const char*>(sqlite3_column_text(stmt, i)),
                                       static_cast<std::size_t>(sqlite3_column_bytes(stmt, i))));
          break;
        case SQLITE_BLOB: {
          static constexpr char kHex[] = "0123456789ABCDEF";
          const auto* bytes = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, i));
          const int len = sqlite3_column_bytes(stmt, i);
          std::string hex = "X'";
          for (int b = 0; b < len; ++b) {
            hex.push_back(kHex[bytes[b] >> 4]);
            hex.push_back(kHex[bytes[b] & 0xF]);
          }
          hex.push_back('\'');
          row.emplace_back(std::move(hex));
          break;
        }
        default:
          row.emplace_back(std::monostate{});
      }
    }
    return row;
  }

  std::vector<std::vector<Value>> query_rows(const std::string& sql) {
    sqlite3_stmt* raw = nullptr;
    if (sqlite3_prepare_v2(db_.get(), sql.c_str(), -1, &raw, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::ConnectionFailed, sqlite3_errmsg(db_.get()));
    }
    Statement stmt(raw);
    const int ncols = sqlite3_column_count(raw);
    std::vector<std::vector<Value>> rows;
    int rc;
    while ((rc = sqlite3_step(raw)) == SQLITE_ROW) rows.push_back(read_row(raw, ncols));
    if (rc != SQLITE_DONE) {
      const int code = sqlite3_errcode(db_.get());
      throw Error(code == SQLITE_AUTH || code == SQLITE_PERM ? ErrorCode::PermissionDenied
                                                             : ErrorCode::ConnectionFailed,
                  sqlite3_errmsg(db_.get()));
    }
    return rows;
  }

  ConnectionConfig config_;
  std::unique_ptr<sqlite3, DbCloser> db_;
};

class EmbeddedAdapter final : public DialectAdapter {
 public:
  Dialect dialect() const override { return Dialect::Embedded; }
  std::string quote_identifier(std::string_view name) const override {
    std::string out = "\"";
    for (char c : name) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    return out + "\"";
  }
  std::unique_ptr<Connection> connect(const ConnectionConfig& config) const override {
    return std::make_unique<SqliteConnection>(config);
  }
};

// Server dialects: quoting and type tables only; connecting reports the
// missing driver.
class ServerAdapter final : public DialectAdapter {
 public:
  ServerAdapter(Dialect d, char open, char close,
                std::vector<std::pair<std::string_view, SemanticType>> overrides)
      : dialect_(d), open_(open), close_(close), overrides_(std::move(overrides)) {}

  Dialect dialect() const override { return dialect_; }
  std::string quote_identifier(std::string_view name) const override {
    std::string out(1, open_);
    for (char c : name) {
      if (c == close_) out.push_back(close_);
      out.push_back(c);
    }
    return out + close_;
  }
  std::unique_ptr<Connection> connect(const ConnectionConfig& config) const override {
    throw Error(ErrorCode::ConnectionFailed,
                "no " + std::string(to_string(dialect_)) + " driver in this build: " +
                    redact_location(config.location));
  }

 protected:
  std::optional<SemanticType> dialect_override(std::string_view upper_type) const override {
    for (const auto& [name, type] : overrides_) {
      if (name == upper_type) return type;
    }
    return std::nullopt;
  }

 private:
  Dialect dialect_;
  char open_;
  char close_;
  std::vector<std::pair<std::string_view, SemanticType>> overrides_;
};

}  // namespace

std::optional<SemanticType> semantic_from_declared(std::string_view declared_type) {
  const std::string t = to_upper(declared_type);
  if (contains(t, "BOOL")) return SemanticType::Boolean;
  if (contains(t, "DATE") || contains(t, "TIME")) return SemanticType::Temporal;
  if (contains(t, "INT") || contains(t, "REAL") || contains(t, "FLOA") || contains(t, "DOUB") ||
      contains(t, "NUMERIC") || contains(t, "DECIMAL") || contains(t, "NUMBER") ||
      contains(t, "MONEY")) {
    return SemanticType::Quantitative;
  }
  return std::nullopt;
}

SemanticType semantic_for_text(std::size_t distinct, std::size_t rows) {
  const double threshold = std::max(20.0, 0.05 * static_cast<double>(rows));
  return static_cast<double>(distinct) <= threshold ? SemanticType::Categorical
                                                     : SemanticType::Unknown;
}

SemanticType infer_semantic_type(std::span<const Value> values, std::string_view declared_type) {
  if (auto t = semantic_from_declared(declared_type)) return *t;
  bool any = false;
  bool all_numeric = true;
  bool all_text = true;
  std::set<std::string> distinct;
  for (const auto& v : values) {
    if (is_null(v)) continue;
    any = true;
    if (const auto* s = std::get_if<std::string>(&v)) {
      all_numeric = false;
      distinct.insert(*s);
    } else {
      all_text = false;
    }
  }
  if (!any) return SemanticType::Unknown;
  const bool declared_text = !declared_type.empty();
  if (all_numeric && !declared_text) return SemanticType::Quantitative;
  if (all_text || declared_text) {
    if (!all_text) {
      distinct.clear();
      for (const auto& v : values) {
        if (!is_null(v)) distinct.insert(display(v));
      }
    }
    return semantic_for_text(distinct.size(), values.size());
  }
  return SemanticType::Unknown;
}

SemanticType DialectAdapter::map_type(std::string_view declared_type, std::size_t distinct,
                                      std::size_t rows) const {
  if (auto t = dialect_override(to_upper(declared_type))) return *t;
  if (auto t = semantic_from_declared(declared_type)) return *t;
  return semantic_for_text(distinct, rows);
}

std::optional<SemanticType> DialectAdapter::dialect_override(std::string_view) const {
  return std::nullopt;
}

const DialectAdapter& adapter_for(Dialect dialect) {
  static const EmbeddedAdapter embedded;
  static const ServerAdapter mysql(Dialect::MySql, '`', '`',
                                   {{"TINYINT(1)", SemanticType::Boolean},
                                    {"BIT(1)", SemanticType::Boolean},
                                    {"YEAR", SemanticType::Temporal}});
  static const ServerAdapter mariadb(Dialect::MariaDb, '`', '`',
                                     {{"TINYINT(1)", SemanticType::Boolean},
                                      {"BIT(1)", SemanticType::Boolean},
                                      {"YEAR", SemanticType::Temporal}});
  static const ServerAdapter postgres(Dialect::PostgreSql, '"', '"',
                                      {{"INTERVAL", SemanticType::Unknown},
                                       {"SERIAL", SemanticType::Quantitative},
                                       {"BIGSERIAL", SemanticType::Quantitative}});
  static const ServerAdapter mssql(Dialect::MsSql, '[', ']',
                                   {{"BIT", SemanticType::Boolean},
                                    {"SMALLDATETIME", SemanticType::Temporal},
                                    {"DATETIMEOFFSET", SemanticType::Temporal},
                                    {"UNIQUEIDENTIFIER", SemanticType::Unknown}});
  static const ServerAdapter oracle(Dialect::Oracle, '"', '"',
                                    {{"NUMBER(1)", SemanticType::Boolean},
                                     {"BINARY_FLOAT", SemanticType::Quantitative},
                                     {"BINARY_DOUBLE", SemanticType::Quantitative}});
  switch (dialect) {
    case Dialect::Embedded: return embedded;
    case Dialect::MySql: return mysql;
    case Dialect::MariaDb: return mariadb;
    case Dialect::PostgreSql: return postgres;
    case Dialect::MsSql: return mssql;
    case Dialect::Oracle: return oracle;
  }
  return embedded;
}

std::string quote_if_needed(const DialectAdapter& adapter, std::string_view name) {
  bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') plain = false;
  }
  static const std::set<std::string> kReservedIdentifiers = {
      "SELECT", "FROM", "WHERE", "GROUP", "ORDER", "BY", "LIMIT", "TABLE", "INDEX",
      "JOIN", "ON", "AS", "AND", "OR", "NOT", "NULL", "IN", "IS", "CASE", "WHEN",
      "THEN", "ELSE", "END", "UNION", "ALL", "DISTINCT", "HAVING", "OFFSET", "VALUES",
      "INSERT", "UPDATE", "DELETE", "DROP", "CREATE", "ALTER", "REPLACE", "KEY", "CHECK",
      "DEFAULT", "PRIMARY", "REFERENCES", "TO", "WITH", "SET", "INTO", "LEFT", "RIGHT",
      "CROSS", "INNER", "OUTER", "NATURAL", "USING", "CAST", "COLLATE", "EXISTS", "BETWEEN",
      "LIKE", "GLOB", "ESCAPE", "ASC", "DESC", "WINDOW", "FILTER", "OVER", "EXCEPT", "INTERSECT",
  };
  if (plain && kReservedIdentifiers.count(to_upper(name)) == 0) return std::string(name);
  return adapter.quote_identifier(name);
}

std::shared_ptr<ConnectionPool::Entry> ConnectionPool::acquire(const ConnectionConfig& config) {
  if (!config.read_only) {
    throw Error(ErrorCode::WriteAccessRequested, "connections are read-only");
  }
  const std::string key = std::string(to_string(config.dialect)) + "|" + config.location;
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  auto entry = std::make_shared<Entry>();
  entry->connection = adapter_for(config.dialect).connect(config);
  entries_.emplace(key, entry);
  return entry;
}

void ConnectionPool::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

ConnectionPool& default_pool() {
  static ConnectionPool pool;
  return pool;
}

SchemaSnapshot retrieve_metadata(const ConnectionConfig& config, const Clock& clock) {
  return default_pool().with_connection(
      config, [&](Connection& c) { return c.introspect(clock); });
}

ResultTable execute_sql(const ValidatedSql& query, const ConnectionConfig& config,
                        std::int64_t row_cap, std::int64_t deadline_ms) {
  return default_pool().with_connection(
      config, [&](Connection& c) { return c.execute(query, row_cap, deadline_ms); });
}

}  // namespace vizgen::sql
