#include "vizgen/workflow/nodes.hpp"

#include "vizgen/customize/customizer.hpp"
#include "vizgen/explain/explanation.hpp"
#include "vizgen/sql/generator.hpp"
#include "vizgen/viz/builder.hpp"
#include "vizgen/viz/preprocess.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <regex>

namespace vizgen::workflow {
namespace {

using sql::ConnectionConfig;
using sql::Dialect;

bool has_token(const std::vector<std::string>& tokens, std::string_view word) {
  return std::find(tokens.begin(), tokens.end(), word) != tokens.end();
}

std::string trim_trailing_punctuation(std::string s) {
  while (!s.empty() && std::string_view(".,;:!?)\"'").find(s.back()) != std::string_view::npos) {
    s.pop_back();
  }
  return s;
}

void note_model_failure(TurnContext& ctx, Node node) {
  if (ctx.usage.failure) {
    ctx.warnings.push_back(fmt::format("{}: model unavailable ({}); used the deterministic path",
                                       to_string(node), *ctx.usage.failure));
  }
}

const sql::ResultTable& require_table(const TurnContext& ctx) {
  if (!ctx.state.last_table) {
    throw Error(ErrorCode::NoConnection, "no query result to work with; connect a database and ask a question");
  }
  return *ctx.state.last_table;
}

Json table_summary(const sql::SchemaSnapshot& snapshot) {
  Json tables = Json::array();
  for (const auto& t : snapshot.tables) {
    Json cols = Json::array();
    for (const auto& c : t.columns) cols.push_back(c.name);
    tables.push_back({{"name", t.name}, {"columns", std::move(cols)}, {"row_count", t.row_count}});
  }
  return tables;
}

std::string table_names(const sql::SchemaSnapshot& snapshot) {
  std::string out;
  for (const auto& t : snapshot.tables) {
    if (!out.empty()) out += ", ";
    out += t.name;
  }
  return out.empty() ? "no tables" : out;
}

}  // namespace

std::optional<ConnectionConfig> connection_from_text(std::string_view text) {
  static const std::regex dsn(R"(\b([A-Za-z][A-Za-z0-9+]*)://\S+)");
  static const std::regex file_uri(R"((^|\s)(file:\S+))");
  static const std::regex path(R"((^|\s)["']?((?:~|\.{1,2})?/?[\w./-]*\.(?:db|sqlite3?))\b)",
                               std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (std::regex_search(s, m, dsn)) {
    const auto scheme = sql::to_lower(m[1].str());
    auto dialect = sql::dialect_from_string(scheme);
    if (!dialect) return std::nullopt;
    std::string location = trim_trailing_punctuation(m[0].str());
    if (*dialect == Dialect::Embedded) location = location.substr(scheme.size() + 3);
    return ConnectionConfig{*dialect, std::move(location), true};
  }
  if (std::regex_search(s, m, file_uri)) {
    return ConnectionConfig{Dialect::Embedded, trim_trailing_punctuation(m[2].str()), true};
  }
  if (std::regex_search(s, m, path)) {
    return ConnectionConfig{Dialect::Embedded, m[2].str(), true};
  }
  return std::nullopt;
}

SystemAction system_action(std::string_view text) {
  const auto tokens = intent::tokenize(text);
  if (has_token(tokens, "disconnect")) return SystemAction::Disconnect;
  if (has_token(tokens, "export") || has_token(tokens, "download")) return SystemAction::Export;
  if (has_token(tokens, "connect") || connection_from_text(text)) return SystemAction::Connect;
  return SystemAction::Status;
}

Json run_system(TurnContext& ctx) {
  auto& state = ctx.state;
  const auto action = ctx.message.payload && ctx.message.payload->contains("location")
                          ? SystemAction::Connect
                          : system_action(ctx.message.text);
  switch (action) {
    case SystemAction::Disconnect: {
      state.active_connection.reset();
      state.schema_cache.reset();
      state.last_table.reset();
      return {{"action", "disconnect"}, {"summary", "Disconnected."}};
    }
    case SystemAction::Export: {
      if (state.charts.empty()) throw Error(ErrorCode::NoChart, "there is no chart to export");
      const auto& chart = state.charts.back();
      const std::string format = has_token(intent::tokenize(ctx.message.text), "csv") ? "csv" : "json";
      const auto endpoint = fmt::format("/sessions/{}/charts/{}/export?format={}", state.session_id,
                                        chart.chart_id, format);
      return {{"action", "export"},
              {"chart_id", chart.chart_id},
              {"format", format},
              {"endpoint", endpoint},
              {"summary", fmt::format("Export of \"{}\" as {} is available at {}.", chart.title, format,
                                      endpoint)}};
    }
    case SystemAction::Status: {
      if (!state.active_connection) {
        throw Error(ErrorCode::NoConnection, "no database is connected; give a file path or DSN to connect");
      }
      if (!state.schema_cache) {
        state.schema_cache = sql::retrieve_metadata(*state.active_connection, ctx.clock);
      }
      return {{"action", "status"},
              {"location", sql::redact_location(state.active_connection->location)},
              {"tables", table_summary(*state.schema_cache)},
              {"summary", fmt::format("Connected to {} ({}).",
                                      sql::redact_location(state.active_connection->location),
                                      table_names(*state.schema_cache))}};
    }
    case SystemAction::Connect:
      break;
  }

  std::optional<ConnectionConfig> config;
  if (ctx.message.payload && ctx.message.payload->contains("location")) {
    config = ctx.message.payload->get<ConnectionConfig>();
  } else {
    config = connection_from_text(ctx.message.text);
  }
  if (!config) {
    throw Error(ErrorCode::InvalidArgument, "no database path or DSN found in the request");
  }
  if (!config->read_only) {
    throw Error(ErrorCode::WriteAccessRequested, "connections are read-only",
                sql::redact_location(config->location));
  }
  auto snapshot = sql::retrieve_metadata(*config, ctx.clock);
  const auto shown = sql::redact_location(config->location);
  const auto summary = fmt::format("Connected to {} ({}).", shown, table_names(snapshot));
  Json out{{"action", "connect"},
           {"dialect", sql::to_string(config->dialect)},
           {"location", shown},
           {"tables", table_summary(snapshot)},
           {"summary", summary}};
  state.active_connection = std::move(config);
  state.schema_cache = std::move(snapshot);
  state.last_table.reset();
  return out;
}

Json run_sql_agent(TurnContext& ctx) {
  auto& state = ctx.state;
  if (!state.active_connection) {
    throw Error(ErrorCode::NoConnection, "no database is connected; give a file path or DSN to connect");
  }
  if (!state.schema_cache) {
    state.schema_cache = sql::retrieve_metadata(*state.active_connection, ctx.clock);
  }
  const auto& snapshot = *state.schema_cache;
  auto plan = sql::generate_sql(ctx.message.text, snapshot, ctx.providers, &ctx.usage);
  note_model_failure(ctx, Node::SqlAgent);

  sql::ValidatedSql validated;
  try {
    validated = sql::validate_sql(plan, snapshot, ctx.config.default_limit);
  } catch (const Error& e) {
    if (plan.generator != sql::Generator::Model) throw;
    ctx.warnings.push_back(fmt::format("SqlAgent: model SQL rejected ({}); used the keyword fallback",
                                       to_string(e.code())));
    plan = sql::fallback_generate_sql(ctx.message.text, snapshot);
    validated = sql::validate_sql(plan, snapshot, ctx.config.default_limit);
  }
  for (const auto& w : validated.warnings) ctx.warnings.push_back("SqlAgent: " + w);

  auto table = sql::execute_sql(validated, *state.active_connection, ctx.config.row_cap,
                                ctx.config.deadline_ms);
  Json columns = Json::array();
  for (const auto& c : table.columns) columns.push_back(c.name);
  Json out{{"sql", validated.sql},
           {"generator", plan.generator == sql::Generator::Model ? "model" : "fallback"},
           {"rationale", plan.rationale},
           {"columns", std::move(columns)},
           {"rows", table.rows.size()},
           {"truncated", table.truncated}};
  state.last_table = std::move(table);
  return out;
}

Json run_visualization_agent(TurnContext& ctx) {
  auto& state = ctx.state;
  const auto& table = require_table(ctx);
  const auto cleaned = viz::preprocess(table);
  const auto ranking = viz::rank_charts(cleaned.profiles, viz::requested_chart_type(ctx.message.text),
                                        ctx.config.rules_or_default());
  std::optional<viz::ChartSpec> chart;
  std::optional<Error> first_failure;
  for (const auto& entry : ranking.entries) {
    try {
      chart = viz::build_chart_spec(entry.chart_type, cleaned.profiles, cleaned.table, ctx.message.text);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ChannelUnsatisfiable) throw;
      if (!first_failure) first_failure = e;
    }
  }
  if (!chart) throw *first_failure;
  if (cleaned.dropped_rows > 0) {
    ctx.warnings.push_back(fmt::format("VisualizationAgent: dropped {} rows with missing values",
                                       cleaned.dropped_rows));
  }
  Json out{{"chart_id", chart->chart_id},
           {"mark", viz::to_string(chart->mark)},
           {"title", chart->title},
           {"rows", chart->data.row_count()},
           {"ranking", ranking}};
  std::erase_if(state.charts, [&](const viz::ChartSpec& c) { return c.chart_id == chart->chart_id; });
  state.charts.push_back(std::move(*chart));
  return out;
}

Json run_analysis_agent(TurnContext& ctx) {
  auto& state = ctx.state;
  const auto& table = require_table(ctx);
  const auto cleaned = viz::preprocess(table);
  auto report = analysis::generate_insights(cleaned.table, ctx.message.text, ctx.providers,
                                            ctx.config.thresholds, &ctx.usage);
  note_model_failure(ctx, Node::AnalysisAgent);
  Json out{{"findings", report.findings.size()},
           {"digest", explain::insight_digest(report)},
           {"narrative", report.narrative}};
  state.insights.push_back(std::move(report));
  return out;
}

Json run_explanation_agent(TurnContext& ctx) {
  if (ctx.state.insights.empty()) {
    throw Error(ErrorCode::NoFindings, "there are no findings to explain yet");
  }
  const auto& report = ctx.state.insights.back();
  const auto plan = explain::plan_searches(report, ctx.message.text);
  const auto evidence = explain::execute_search_plan(plan, *ctx.providers.search, ctx.config.results_per_query);
  for (const auto& w : evidence.warnings) ctx.warnings.push_back("ExplanationAgent: " + w);
  auto explanation = explain::synthesize_explanation(report, evidence, ctx.providers, &ctx.usage);
  note_model_failure(ctx, Node::ExplanationAgent);
  return {{"plan", plan}, {"evidence_items", evidence.items.size()}, {"explanation", explanation}};
}

Json run_customizer(TurnContext& ctx) {
  auto& state = ctx.state;
  if (state.charts.empty()) throw Error(ErrorCode::NoChart, "there is no chart to customize");
  const auto& chart = state.charts.back();
  const auto patch = customize::parse_customization(ctx.message.text, chart, ctx.providers, &ctx.usage);
  note_model_failure(ctx, Node::Customizer);
  const auto validated = customize::validate_patch(chart, patch);
  for (const auto& w : validated.warnings) ctx.warnings.push_back("Customizer: " + w);
  auto updated = customize::apply_patch(chart, patch);
  Json out{{"chart_id", updated.chart_id}, {"revision", updated.revision}, {"patch", validated.patch}};
  state.charts.back() = std::move(updated);
  return out;
}

NodeRegistry default_registry() {
  return {{Node::System, run_system},
          {Node::SqlAgent, run_sql_agent},
          {Node::VisualizationAgent, run_visualization_agent},
          {Node::AnalysisAgent, run_analysis_agent},
          {Node::ExplanationAgent, run_explanation_agent},
          {Node::Customizer, run_customizer}};
}

const WorkflowGraph& default_graph() {
  static const WorkflowGraph graph = compile_workflow(default_registry());
  return graph;
}

}  // namespace vizgen::workflow
