#include "vizgen/workflow/state.hpp"

#include <sstream>

namespace vizgen::workflow {
namespace {

Timestamp timestamp_from(const Json& j, const char* key) {
  const auto text = j.at(key).get<std::string>();
  const auto t = parse_timestamp(text);
  if (!t) throw Error(ErrorCode::InvalidArgument, std::string("bad timestamp in ") + key);
  return *t;
}

}  // namespace

ErrorNotice notice_from(const Error& e) {
  std::string msg = e.message();
  if (!e.subject().empty() && msg.find(e.subject()) == std::string::npos) {
    msg = e.subject() + ": " + msg;
  }
  return {e.code(), std::move(msg)};
}

std::string error_status(ErrorCode code) { return "error(" + std::string(to_string(code)) + ")"; }

const viz::ChartSpec* ConversationState::find_chart(std::string_view chart_id) const {
  for (const auto& c : charts) {
    if (c.chart_id == chart_id) return &c;
  }
  return nullptr;
}

void to_json(Json& j, const UserMessage& m) {
  j = Json{{"session_id", m.session_id}, {"text", m.text}, {"received_at", format_timestamp(m.received_at)}};
  if (m.payload) j["payload"] = *m.payload;
}

void from_json(const Json& j, UserMessage& m) {
  m.session_id = j.at("session_id").get<std::string>();
  m.text = j.at("text").get<std::string>();
  m.received_at = timestamp_from(j, "received_at");
  m.payload.reset();
  if (j.contains("payload") && !j["payload"].is_null()) m.payload = j["payload"];
}

void to_json(Json& j, const ErrorNotice& e) { j = Json{{"code", to_string(e.code)}, {"message", e.message}}; }

void from_json(const Json& j, ErrorNotice& e) {
  e.code = error_code_from_string(j.at("code").get<std::string>());
  e.message = j.at("message").get<std::string>();
}

void to_json(Json& j, const ResponseBundle& b) {
  j = Json{{"message", b.message}, {"charts", b.charts}, {"errors", b.errors}, {"warnings", b.warnings}};
  j["insight"] = b.insight ? Json(*b.insight) : Json(nullptr);
  j["explanation"] = b.explanation ? Json(*b.explanation) : Json(nullptr);
}

void from_json(const Json& j, ResponseBundle& b) {
  b.message = j.at("message").get<std::string>();
  b.charts = j.at("charts").get<std::vector<viz::ChartSpec>>();
  b.errors = j.at("errors").get<std::vector<ErrorNotice>>();
  b.warnings = j.value("warnings", std::vector<std::string>{});
  b.insight = get_optional<analysis::InsightReport>(j, "insight");
  b.explanation = get_optional<explain::Explanation>(j, "explanation");
}

void to_json(Json& j, const TraceEvent& e) {
  j = Json{{"node", e.node},
           {"input_digest", e.input_digest},
           {"output_digest", e.output_digest},
           {"duration_ms", e.duration_ms},
           {"status", e.status},
           {"model_attempts", e.model_attempts}};
}

void from_json(const Json& j, TraceEvent& e) {
  e.node = j.at("node").get<std::string>();
  e.input_digest = j.at("input_digest").get<std::string>();
  e.output_digest = j.at("output_digest").get<std::string>();
  e.duration_ms = j.at("duration_ms").get<std::int64_t>();
  e.status = j.at("status").get<std::string>();
  e.model_attempts = j.value("model_attempts", 0);
}

void to_json(Json& j, const ConversationState& s) {
  Json history = Json::array();
  for (const auto& h : s.history) history.push_back({{"message", h.message}, {"response", h.response}});
  j = Json{{"session_id", s.session_id},
           {"history", std::move(history)},
           {"charts", s.charts},
           {"insights", s.insights},
           {"trace", s.trace}};
  j["active_connection"] = s.active_connection ? Json(*s.active_connection) : Json(nullptr);
  j["schema_cache"] = s.schema_cache ? Json(*s.schema_cache) : Json(nullptr);
  j["last_table"] = s.last_table ? Json(*s.last_table) : Json(nullptr);
}

void from_json(const Json& j, ConversationState& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.history.clear();
  for (const auto& h : j.at("history")) {
    s.history.push_back({h.at("message").get<UserMessage>(), h.at("response").get<ResponseBundle>()});
  }
  s.active_connection = get_optional<sql::ConnectionConfig>(j, "active_connection");
  s.schema_cache = get_optional<sql::SchemaSnapshot>(j, "schema_cache");
  s.last_table = get_optional<sql::ResultTable>(j, "last_table");
  s.charts = j.at("charts").get<std::vector<viz::ChartSpec>>();
  s.insights = j.at("insights").get<std::vector<analysis::InsightReport>>();
  s.trace = j.at("trace").get<std::vector<TraceEvent>>();
}

std::string serialize_state(const ConversationState& state) { return canonical(Json(state)); }

ConversationState parse_state(std::string_view text) {
  try {
    return Json::parse(text).get<ConversationState>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::StorageFailure, std::string("corrupt state document: ") + e.what());
  }
}

std::string trace_to_ndjson(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    nlohmann::ordered_json line;
    line["node"] = e.node;
    line["input_digest"] = e.input_digest;
    line["output_digest"] = e.output_digest;
    line["duration_ms"] = e.duration_ms;
    line["status"] = e.status;
    line["model_attempts"] = e.model_attempts;
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<TraceEvent> trace_from_ndjson(std::string_view text) {
  std::vector<TraceEvent> events;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(Json::parse(line).get<TraceEvent>());
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("bad trace line: ") + e.what());
    }
  }
  return events;
}

}  // namespace vizgen::workflow
