#pragma once

#include "vizgen/json_util.hpp"
#include "vizgen/time.hpp"
#include "vizgen/value.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::sql {

enum class Dialect { Embedded, MySql, PostgreSql, MariaDb, MsSql, Oracle };

std::string_view to_string(Dialect d);
std::optional<Dialect> dialect_from_string(std::string_view name);

struct ConnectionConfig {
  Dialect dialect = Dialect::Embedded;
  std::string location;  // DSN or, for the embedded engine, a file path
  bool read_only = true;

  bool operator==(const ConnectionConfig&) const = default;
};

// Masks passwords in URL-style ("scheme://user:pw@host") and key=value
// ("password=pw") DSNs. Everything user-visible goes through this.
std::string redact_location(std::string_view location);

enum class SemanticType { Quantitative, Categorical, Temporal, Boolean, Unknown };

std::string_view to_string(SemanticType t);
SemanticType semantic_type_from_string(std::string_view name);

struct ForeignKey {
  std::string column;
  std::string ref_table;
  std::string ref_column;

  bool operator==(const ForeignKey&) const = default;
};

struct ColumnMeta {
  std::string name;
  std::string declared_type;
  SemanticType semantic_type = SemanticType::Unknown;
  std::vector<std::string> sample_values;  // at most 5

  bool operator==(const ColumnMeta&) const = default;
};

struct TableMeta {
  std::string name;
  std::vector<ColumnMeta> columns;
  std::optional<std::vector<std::string>> primary_key;
  std::vector<ForeignKey> foreign_keys;
  std::int64_t row_count = 0;

  const ColumnMeta* find_column(std::string_view column) const;  // case-insensitive
  bool operator==(const TableMeta&) const = default;
};

struct SchemaSnapshot {
  std::vector<TableMeta> tables;
  Timestamp fetched_at{};

  const TableMeta* find_table(std::string_view table) const;  // case-insensitive
  // Throws InvalidArgument when names collide or a foreign key dangles.
  void check_invariants() const;
  bool operator==(const SchemaSnapshot&) const = default;
};

enum class Generator { Model, Fallback };

struct SqlPlan {
  std::string raw_sql;
  std::string rationale;
  std::vector<std::string> referenced_tables;
  Generator generator = Generator::Fallback;
};

struct ValidatedSql {
  std::string sql;
  std::optional<std::int64_t> injected_limit;
  std::vector<std::string> warnings;
};

struct ResultColumn {
  std::string name;
  SemanticType semantic_type = SemanticType::Unknown;

  bool operator==(const ResultColumn&) const = default;
};

struct ResultTable {
  std::vector<ResultColumn> columns;
  std::vector<std::vector<Value>> rows;
  bool truncated = false;
  std::string source_sql;

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::vector<Value> column_values(std::size_t index) const;
  bool operator==(const ResultTable&) const = default;
};

bool iequals(std::string_view a, std::string_view b);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

void to_json(Json& j, const ConnectionConfig& c);
void from_json(const Json& j, ConnectionConfig& c);
void to_json(Json& j, const ColumnMeta& c);
void from_json(const Json& j, ColumnMeta& c);
void to_json(Json& j, const TableMeta& t);
void from_json(const Json& j, TableMeta& t);
void to_json(Json& j, const SchemaSnapshot& s);
void from_json(const Json& j, SchemaSnapshot& s);
void to_json(Json& j, const SqlPlan& p);
void to_json(Json& j, const ValidatedSql& v);
void to_json(Json& j, const ResultTable& t);
void from_json(const Json& j, ResultTable& t);

// Column-major form used inside ChartSpec data blocks and API responses:
// {"columns":[{"name":..,"semantic_type":..,"values":[..]}, ...]}.
Json column_major(const ResultTable& t);

}  // namespace vizgen::sql
