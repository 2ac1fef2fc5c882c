#pragma once

#include "vizgen/sql/schema.hpp"
#include "vizgen/workflow/engine.hpp"

#include <optional>
#include <string_view>

namespace vizgen::workflow {

// First DSN ("postgresql://...", "mysql://...", "file:...") or database file
// path ("*.db", "*.sqlite", "*.sqlite3") in the text.
std::optional<sql::ConnectionConfig> connection_from_text(std::string_view text);

enum class SystemAction { Connect, Disconnect, Export, Status };
SystemAction system_action(std::string_view text);

Json run_system(TurnContext& ctx);
Json run_sql_agent(TurnContext& ctx);
Json run_visualization_agent(TurnContext& ctx);
Json run_analysis_agent(TurnContext& ctx);
Json run_explanation_agent(TurnContext& ctx);
Json run_customizer(TurnContext& ctx);

}  // namespace vizgen::workflow
