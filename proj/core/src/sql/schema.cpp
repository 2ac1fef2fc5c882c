#include "vizgen/sql/schema.hpp"

#include "vizgen/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <set>

namespace vizgen::sql {
namespace {

constexpr std::array<std::pair<Dialect, std::string_view>, 6> kDialects{{
    {Dialect::Embedded, "embedded"},
    {Dialect::MySql, "mysql"},
    {Dialect::PostgreSql, "postgresql"},
    {Dialect::MariaDb, "mariadb"},
    {Dialect::MsSql, "mssql"},
    {Dialect::Oracle, "oracle"},
}};

constexpr std::array<std::pair<SemanticType, std::string_view>, 5> kSemanticTypes{{
    {SemanticType::Quantitative, "quantitative"},
    {SemanticType::Categorical, "categorical"},
    {SemanticType::Temporal, "temporal"},
    {SemanticType::Boolean, "boolean"},
    {SemanticType::Unknown, "unknown"},
}};

}  // namespace

std::string_view to_string(Dialect d) {
  for (const auto& [k, v] : kDialects) {
    if (k == d) return v;
  }
  return "embedded";
}

std::optional<Dialect> dialect_from_string(std::string_view name) {
  const std::string lowered = to_lower(name);
  for (const auto& [k, v] : kDialects) {
    if (v == lowered) return k;
  }
  if (lowered == "sqlite" || lowered == "sqlite3") return Dialect::Embedded;
  if (lowered == "postgres") return Dialect::PostgreSql;
  if (lowered == "sqlserver") return Dialect::MsSql;
  return std::nullopt;
}

std::string redact_location(std::string_view location) {
  static const std::regex url_password(R"((://[^/:@\s]*:)([^@/\s]*)@)");
  static const std::regex kv_password(R"(\b(password|pwd|passwd|pass)=([^;&\s]*))",
                                      std::regex::icase);
  std::string out = std::regex_replace(std::string(location), url_password, "$1***@");
  return std::regex_replace(out, kv_password, "$1=***");
}

std::string_view to_string(SemanticType t) {
  for (const auto& [k, v] : kSemanticTypes) {
    if (k == t) return v;
  }
  return "unknown";
}

SemanticType semantic_type_from_string(std::string_view name) {
  for (const auto& [k, v] : kSemanticTypes) {
    if (v == name) return k;
  }
  return SemanticType::Unknown;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

const ColumnMeta* TableMeta::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const TableMeta* SchemaSnapshot::find_table(std::string_view table) const {
  for (const auto& t : tables) {
    if (iequals(t.name, table)) return &t;
  }
  return nullptr;
}

void SchemaSnapshot::check_invariants() const {
  std::set<std::string> table_names;
  for (const auto& t : tables) {
    if (!table_names.insert(to_lower(t.name)).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate table name", t.name);
    }
    std::set<std::string> column_names;
    for (const auto& c : t.columns) {
      if (!column_names.insert(to_lower(c.name)).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate column name in " + t.name, c.name);
      }
      if (c.sample_values.size() > 5) {
        throw Error(ErrorCode::InvalidArgument, "more than 5 sample values", c.name);
      }
    }
    if (t.row_count < 0) throw Error(ErrorCode::InvalidArgument, "negative row count", t.name);
  }
  for (const auto& t : tables) {
    for (const auto& fk : t.foreign_keys) {
      const TableMeta* ref = find_table(fk.ref_table);
      if (t.find_column(fk.column) == nullptr || ref == nullptr ||
          ref->find_column(fk.ref_column) == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "dangling foreign key in " + t.name, fk.column);
      }
    }
  }
}

std::optional<std::size_t> ResultTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (iequals(columns[i].name, name)) return i;
  }
  return std::nullopt;
}

std::vector<Value> ResultTable::column_values(std::size_t index) const {
  std::vector<Value> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(index));
  return out;
}

void to_json(Json& j, const ConnectionConfig& c) {
  j = Json{{"dialect", to_string(c.dialect)}, {"location", c.location}, {"read_only", c.read_only}};
}

void from_json(const Json& j, ConnectionConfig& c) {
  const auto name = j.value("dialect", std::string{"embedded"});
  const auto dialect = dialect_from_string(name);
  if (!dialect) throw Error(ErrorCode::InvalidArgument, "unknown dialect", name);
  c.dialect = *dialect;
  c.location = j.at("location").get<std::string>();
  c.read_only = j.value("read_only", true);
}

void to_json(Json& j, const ColumnMeta& c) {
  j = Json{{"name", c.name},
           {"declared_type", c.declared_type},
           {"semantic_type", to_string(c.semantic_type)},
           {"sample_values", c.sample_values}};
}

void from_json(const Json& j, ColumnMeta& c) {
  c.name = j.at("name").get<std::string>();
  c.declared_type = j.value("declared_type", std::string{});
  c.semantic_type = semantic_type_from_string(j.value("semantic_type", std::string{"unknown"}));
  c.sample_values = j.value("sample_values", std::vector<std::string>{});
}

void to_json(Json& j, const TableMeta& t) {
  Json fks = Json::array();
  for (const auto& fk : t.foreign_keys) {
    fks.push_back({{"column", fk.column}, {"ref_table", fk.ref_table}, {"ref_column", fk.ref_column}});
  }
  j = Json{{"name", t.name}, {"columns", t.columns}, {"foreign_keys", fks}, {"row_count", t.row_count}};
  put_optional(j, "primary_key", t.primary_key);
}

void from_json(const Json& j, TableMeta& t) {
  t.name = j.at("name").get<std::string>();
  t.columns = j.at("columns").get<std::vector<ColumnMeta>>();
  t.primary_key = get_optional<std::vector<std::string>>(j, "primary_key");
  t.foreign_keys.clear();
  for (const auto& fk : j.value("foreign_keys", Json::array())) {
    t.foreign_keys.push_back({fk.at("column").get<std::string>(),
                              fk.at("ref_table").get<std::string>(),
                              fk.at("ref_column").get<std::string>()});
  }
  t.row_count = j.value("row_count", std::int64_t{0});
}

void to_json(Json& j, const SchemaSnapshot& s) {
  j = Json{{"tables", s.tables}, {"fetched_at", format_timestamp(s.fetched_at)}};
}

void from_json(const Json& j, SchemaSnapshot& s) {
  s.tables = j.at("tables").get<std::vector<TableMeta>>();
  s.fetched_at = parse_timestamp(j.value("fetched_at", std::string{})).value_or(Timestamp{});
}

void to_json(Json& j, const SqlPlan& p) {
  j = Json{{"raw_sql", p.raw_sql},
           {"rationale", p.rationale},
           {"referenced_tables", p.referenced_tables},
           {"generator", p.generator == Generator::Model ? "model" : "fallback"}};
}

void to_json(Json& j, const ValidatedSql& v) {
  j = Json{{"sql", v.sql}, {"warnings", v.warnings}};
  put_optional(j, "injected_limit", v.injected_limit);
}

void to_json(Json& j, const ResultTable& t) {
  Json cols = Json::array();
  for (const auto& c : t.columns) {
    cols.push_back({{"name", c.name}, {"semantic_type", to_string(c.semantic_type)}});
  }
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(value_to_json(v));
    rows.push_back(std::move(r));
  }
  j = Json{{"columns", cols}, {"rows", rows}, {"truncated", t.truncated}, {"source_sql", t.source_sql}};
}

void from_json(const Json& j, ResultTable& t) {
  t.columns.clear();
  for (const auto& c : j.at("columns")) {
    t.columns.push_back({c.at("name").get<std::string>(),
                         semantic_type_from_string(c.value("semantic_type", std::string{"unknown"}))});
  }
  t.rows.clear();
  for (const auto& r : j.at("rows")) {
    std::vector<Value> row;
    row.reserve(r.size());
    for (const auto& v : r) row.push_back(value_from_json(v));
    t.rows.push_back(std::move(row));
  }
  t.truncated = j.value("truncated", false);
  t.source_sql = j.value("source_sql", std::string{});
}

Json column_major(const ResultTable& t) {
  Json cols = Json::array();
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    Json values = Json::array();
    for (const auto& row : t.rows) values.push_back(value_to_json(row[i]));
    cols.push_back({{"name", t.columns[i].name},
                    {"semantic_type", to_string(t.columns[i].semantic_type)},
                    {"values", std::move(values)}});
  }
  return Json{{"columns", std::move(cols)}};
}

}  // namespace vizgen::sql
