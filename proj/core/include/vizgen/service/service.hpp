#pragma once

#include "vizgen/providers/providers.hpp"
#include "vizgen/service/config.hpp"
#include "vizgen/service/session_store.hpp"
#include "vizgen/workflow/engine.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace vizgen::service {

enum class ExportFormat { Json, Csv };

// Throws UnsupportedFormat.
ExportFormat export_format_from_string(std::string_view name);

struct ExportedChart {
  std::string content;
  std::string content_type;
};

// Replaces credentials in every string of the document.
Json redact_secrets(Json document);

// Session-oriented facade over run_turn and the session store. Turns on
// different sessions run concurrently; a second turn on a busy session is
// rejected rather than queued.
class Service {
 public:
  Service(ServiceConfig config, providers::Providers providers,
          std::shared_ptr<const Clock> clock = system_clock(),
          const workflow::WorkflowGraph& graph = workflow::default_graph());

  // Throws StorageFailure.
  std::string create_session();

  // Throws UnknownSession, TurnInProgress, StorageFailure.
  workflow::ResponseBundle post_message(std::string_view session_id, std::string_view text,
                                        std::optional<Json> payload = std::nullopt);

  // Returns {dialect, location, tables:[{name, columns, row_count}]} with the
  // location redacted. Throws UnknownSession, TurnInProgress,
  // WriteAccessRequested, ConnectionFailed, PermissionDenied.
  Json register_connection(std::string_view session_id, const sql::ConnectionConfig& config);

  // Throws UnknownSession, UnknownChart, UnsupportedFormat.
  ExportedChart export_chart(std::string_view session_id, std::string_view chart_id, ExportFormat format) const;

  // History, charts and insights; no credentials. Throws UnknownSession.
  Json get_state(std::string_view session_id) const;

  // Whole-session trace as NDJSON. Throws UnknownSession.
  std::string export_trace(std::string_view session_id) const;

  const ServiceConfig& config() const { return config_; }

 private:
  std::shared_ptr<std::mutex> session_mutex(std::string_view session_id);

  ServiceConfig config_;
  providers::Providers providers_;
  std::shared_ptr<const Clock> clock_;
  const workflow::WorkflowGraph& graph_;
  SessionStore store_;

  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>, std::less<>> locks_;
};

}  // namespace vizgen::service
