#pragma once

#include "vizgen/service/service.hpp"

#include <memory>
#include <optional>
#include <string>

namespace vizgen::service {

// HTTP status for an error code; the body is {"error":{"code","message"}}.
int http_status(ErrorCode code);

// JSON endpoints:
//   POST /sessions                                  -> {"session_id"}
//   POST /sessions/{id}/messages       {text, payload?} -> ResponseBundle
//   GET  /sessions/{id}/state                       -> public state view
//   POST /sessions/{id}/connections {dialect, location} -> schema summary
//   GET  /sessions/{id}/charts/{chart_id}/export?format=json|csv
//   GET  /sessions/{id}/trace                       -> NDJSON
//   GET  /health
class HttpServer {
 public:
  // With a token, every endpoint but /health needs "Authorization: Bearer <token>".
  HttpServer(Service& service, std::optional<std::string> api_token = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws InvalidArgument.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vizgen::service
