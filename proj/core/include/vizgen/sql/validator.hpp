#pragma once

#include "vizgen/sql/schema.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::sql {

inline constexpr std::int64_t kDefaultLimit = 10'000;
inline constexpr char kCartesianWarning[] = "possible cartesian product";

// Checks, in order:
//   1. exactly one statement                          -> ParseError / MultipleStatements
//   2. statement is SELECT, VALUES or WITH ... SELECT  -> ReadOnlyViolation(verb)
//   3. no write/admin keyword in keyword position      -> ReadOnlyViolation(keyword)
//   4. tables and columns resolve (alias-aware)        -> UnknownTable / UnknownColumn
//   5. joins without ON/USING                          -> warning
//   6. LIMIT appended when the outer query has none
// Throws vizgen::Error. Re-validating a validated statement is a no-op.
ValidatedSql validate_sql(const SqlPlan& plan, const SchemaSnapshot& snapshot,
                          std::int64_t default_limit = kDefaultLimit);

ValidatedSql validate_sql(std::string_view sql, const SchemaSnapshot& snapshot,
                          std::int64_t default_limit = kDefaultLimit);

// Base tables the statement reads, in first-reference order. Requires a
// statement that passes validation.
std::vector<std::string> referenced_tables(std::string_view sql, const SchemaSnapshot& snapshot);

}  // namespace vizgen::sql
