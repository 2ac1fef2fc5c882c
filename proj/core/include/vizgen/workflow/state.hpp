#pragma once

#include "vizgen/analysis/insights.hpp"
#include "vizgen/error.hpp"
#include "vizgen/explain/explanation.hpp"
#include "vizgen/json_util.hpp"
#include "vizgen/sql/schema.hpp"
#include "vizgen/time.hpp"
#include "vizgen/viz/chart_spec.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vizgen::workflow {

struct UserMessage {
  std::string session_id;
  std::string text;
  Timestamp received_at{};
  // Structured arguments for the System node, e.g. a ConnectionConfig
  // {"dialect": "embedded", "location": "/data/sales.db"}.
  std::optional<Json> payload;

  bool operator==(const UserMessage&) const = default;
};

struct ErrorNotice {
  ErrorCode code = ErrorCode::Internal;
  std::string message;

  bool operator==(const ErrorNotice&) const = default;
};

ErrorNotice notice_from(const Error& e);

struct ResponseBundle {
  std::string message;                      // never empty
  std::vector<viz::ChartSpec> charts;       // produced or updated this turn
  std::optional<analysis::InsightReport> insight;
  std::optional<explain::Explanation> explanation;
  std::vector<ErrorNotice> errors;
  std::vector<std::string> warnings;

  bool operator==(const ResponseBundle&) const = default;
};

inline constexpr char kStatusOk[] = "ok";

struct TraceEvent {
  std::string node;
  std::string input_digest;
  std::string output_digest;
  std::int64_t duration_ms = 0;
  std::string status = kStatusOk;  // "ok" or "error(<Code>)"
  int model_attempts = 0;

  bool operator==(const TraceEvent&) const = default;
};

std::string error_status(ErrorCode code);

struct HistoryEntry {
  UserMessage message;
  ResponseBundle response;

  bool operator==(const HistoryEntry&) const = default;
};

struct ConversationState {
  std::string session_id;
  std::vector<HistoryEntry> history;
  std::optional<sql::ConnectionConfig> active_connection;
  std::optional<sql::SchemaSnapshot> schema_cache;
  std::optional<sql::ResultTable> last_table;
  std::vector<viz::ChartSpec> charts;  // unique chart_ids, most recent last
  std::vector<analysis::InsightReport> insights;
  std::vector<TraceEvent> trace;

  const viz::ChartSpec* find_chart(std::string_view chart_id) const;
  bool operator==(const ConversationState&) const = default;
};

void to_json(Json& j, const UserMessage& m);
void from_json(const Json& j, UserMessage& m);
void to_json(Json& j, const ErrorNotice& e);
void from_json(const Json& j, ErrorNotice& e);
void to_json(Json& j, const ResponseBundle& b);
void from_json(const Json& j, ResponseBundle& b);
void to_json(Json& j, const TraceEvent& e);
void from_json(const Json& j, TraceEvent& e);
void to_json(Json& j, const ConversationState& s);
void from_json(const Json& j, ConversationState& s);

// Canonical text form; parse(serialize(s)) == s.
std::string serialize_state(const ConversationState& state);
ConversationState parse_state(std::string_view text);

// One TraceEvent per line, fields in declaration order.
std::string trace_to_ndjson(const std::vector<TraceEvent>& events);
std::vector<TraceEvent> trace_from_ndjson(std::string_view text);

}  // namespace vizgen::workflow
