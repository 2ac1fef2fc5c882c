#pragma once

#include "vizgen/providers/providers.hpp"
#include "vizgen/sql/schema.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vizgen::sql {

// Lowercase alphanumeric runs.
std::vector<std::string> question_tokens(std::string_view question);

// Prompt context: the question followed by every table's columns with
// declared type, semantic type and samples. Deterministic.
std::string describe_schema(std::string_view question, const SchemaSnapshot& snapshot);

// Keyword-matching generator used when no model is available. Throws
// NoTables, NoUsableColumns.
SqlPlan fallback_generate_sql(std::string_view question, const SchemaSnapshot& snapshot);

// Asks the model for {sql, rationale, tables}; any provider failure falls
// back to fallback_generate_sql. Throws NoTables, GenerationFailed.
SqlPlan generate_sql(std::string_view question, const SchemaSnapshot& snapshot,
                     const providers::Providers& providers,
                     providers::ModelUsage* usage = nullptr);

}  // namespace vizgen::sql
