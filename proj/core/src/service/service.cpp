#include "vizgen/service/service.hpp"

#include "vizgen/sql/database.hpp"

namespace vizgen::service {
namespace {

Json table_summary(const sql::SchemaSnapshot& snapshot) {
  Json tables = Json::array();
  for (const auto& t : snapshot.tables) {
    Json cols = Json::array();
    for (const auto& c : t.columns) {
      cols.push_back({{"name", c.name}, {"semantic_type", sql::to_string(c.semantic_type)}});
    }
    tables.push_back({{"name", t.name}, {"columns", std::move(cols)}, {"row_count", t.row_count}});
  }
  return tables;
}

}  // namespace

ExportFormat export_format_from_string(std::string_view name) {
  const auto lowered = sql::to_lower(name);
  if (lowered == "json") return ExportFormat::Json;
  if (lowered == "csv") return ExportFormat::Csv;
  throw Error(ErrorCode::UnsupportedFormat, "export formats are json and csv", std::string(name));
}

Json redact_secrets(Json document) {
  if (document.is_string()) return sql::redact_location(document.get<std::string>());
  if (document.is_structured()) {
    for (auto& child : document) child = redact_secrets(std::move(child));
  }
  return document;
}

Service::Service(ServiceConfig config, providers::Providers providers, std::shared_ptr<const Clock> clock,
                 const workflow::WorkflowGraph& graph)
    : config_(std::move(config)),
      providers_(std::move(providers)),
      clock_(clock ? std::move(clock) : system_clock()),
      graph_(graph),
      store_(config_.state_dir) {}

std::shared_ptr<std::mutex> Service::session_mutex(std::string_view session_id) {
  std::lock_guard guard(locks_mutex_);
  auto it = locks_.find(session_id);
  if (it == locks_.end()) it = locks_.emplace(std::string(session_id), std::make_shared<std::mutex>()).first;
  return it->second;
}

std::string Service::create_session() { return store_.create(clock_->now()).session_id; }

workflow::ResponseBundle Service::post_message(std::string_view session_id, std::string_view text,
                                               std::optional<Json> payload) {
  if (!store_.exists(session_id)) throw Error(ErrorCode::UnknownSession, "no such session", std::string(session_id));
  auto mutex = session_mutex(session_id);
  std::unique_lock lock(*mutex, std::try_to_lock);
  if (!lock.owns_lock()) {
    throw Error(ErrorCode::TurnInProgress, "a turn is already running for this session", std::string(session_id));
  }
  auto record = store_.load(session_id);
  workflow::UserMessage message{record.session_id, std::string(text), clock_->now(), std::move(payload)};
  workflow::TurnOptions options{config_.turn, clock_};
  auto result = workflow::run_turn(record.state, message, graph_, providers_, options);
  record.state = std::move(result.state);
  store_.save(record);
  return redact_secrets(Json(result.bundle)).get<workflow::ResponseBundle>();
}

Json Service::register_connection(std::string_view session_id, const sql::ConnectionConfig& config) {
  if (!store_.exists(session_id)) throw Error(ErrorCode::UnknownSession, "no such session", std::string(session_id));
  if (!config.read_only) {
    throw Error(ErrorCode::WriteAccessRequested, "connections are read-only", sql::redact_location(config.location));
  }
  auto mutex = session_mutex(session_id);
  std::unique_lock lock(*mutex, std::try_to_lock);
  if (!lock.owns_lock()) {
    throw Error(ErrorCode::TurnInProgress, "a turn is already running for this session", std::string(session_id));
  }
  auto snapshot = sql::retrieve_metadata(config, *clock_);
  auto record = store_.load(session_id);
  Json summary{{"dialect", sql::to_string(config.dialect)},
               {"location", sql::redact_location(config.location)},
               {"tables", table_summary(snapshot)}};
  record.state.active_connection = config;
  record.state.schema_cache = std::move(snapshot);
  record.state.last_table.reset();
  store_.save(record);
  return summary;
}

ExportedChart Service::export_chart(std::string_view session_id, std::string_view chart_id,
                                    ExportFormat format) const {
  const auto record = store_.load(session_id);
  const auto* chart = record.state.find_chart(chart_id);
  if (!chart) throw Error(ErrorCode::UnknownChart, "no such chart in this session", std::string(chart_id));
  if (format == ExportFormat::Csv) return {viz::to_csv(chart->data), "text/csv"};
  return {canonical(Json(*chart)), "application/json"};
}

Json Service::get_state(std::string_view session_id) const {
  const auto record = store_.load(session_id);
  const auto& state = record.state;
  Json history = Json::array();
  for (const auto& h : state.history) {
    Json entry{{"text", h.message.text},
               {"received_at", format_timestamp(h.message.received_at)},
               {"response", h.response}};
    history.push_back(std::move(entry));
  }
  Json view{{"session_id", record.session_id},
            {"created_at", format_timestamp(record.created_at)},
            {"revision", record.revision},
            {"history", std::move(history)},
            {"charts", state.charts},
            {"insights", state.insights}};
  if (state.active_connection) {
    view["connection"] = {{"dialect", sql::to_string(state.active_connection->dialect)},
                          {"location", sql::redact_location(state.active_connection->location)},
                          {"read_only", state.active_connection->read_only}};
  } else {
    view["connection"] = nullptr;
  }
  view["tables"] = state.schema_cache ? table_summary(*state.schema_cache) : Json::array();
  return redact_secrets(std::move(view));
}

std::string Service::export_trace(std::string_view session_id) const {
  return workflow::trace_to_ndjson(store_.load(session_id).state.trace);
}

}  // namespace vizgen::service
