#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "vizgen/service/http_server.hpp"

#include <httplib.h>

namespace vizgen::service {
namespace {

constexpr char kJson[] = "application/json";

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", {{"code", to_string(code)}, {"message", message}}}}, http_status(code));
}

Json parse_body(const httplib::Request& req) {
  try {
    auto body = Json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return body;
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON");
  }
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownChart: return 404;
    case ErrorCode::TurnInProgress: return 409;
    case ErrorCode::WriteAccessRequested:
    case ErrorCode::PermissionDenied: return 403;
    case ErrorCode::ConnectionFailed: return 422;
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedFormat: return 400;
    default: return 500;
  }
}

struct HttpServer::Impl {
  Impl(Service& s, std::optional<std::string> t) : service(s), token(std::move(t)) {}

  Service& service;
  std::optional<std::string> token;
  httplib::Server server;

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      if (token && req.get_header_value("Authorization") != "Bearer " + *token) {
        send_error(res, ErrorCode::InvalidArgument, "missing or wrong bearer token");
        res.status = 401;
        return;
      }
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), sql::redact_location(e.message()));
      } catch (const Json::exception& e) {
        send_error(res, ErrorCode::InvalidArgument, e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::Internal, e.what());
      }
    };
  }

  void install_routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, {{"status", "ok"}}); });
    server.Post("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
                  send_json(res, {{"session_id", service.create_session()}}, 201);
                }));
    server.Post(R"(/sessions/([0-9A-Za-z]+)/messages)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  std::optional<Json> payload;
                  if (body.contains("payload") && !body["payload"].is_null()) payload = body["payload"];
                  const auto bundle = service.post_message(req.matches[1].str(), body.at("text").get<std::string>(),
                                                           std::move(payload));
                  send_json(res, bundle);
                }));
    server.Get(R"(/sessions/([0-9A-Za-z]+)/state)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, service.get_state(req.matches[1].str()));
               }));
    server.Post(R"(/sessions/([0-9A-Za-z]+)/connections)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto config = parse_body(req).get<sql::ConnectionConfig>();
                  send_json(res, service.register_connection(req.matches[1].str(), config));
                }));
    server.Get(R"(/sessions/([0-9A-Za-z]+)/charts/([0-9A-Za-z_]+)/export)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto format = export_format_from_string(
                     req.has_param("format") ? req.get_param_value("format") : std::string("json"));
                 auto exported = service.export_chart(req.matches[1].str(), req.matches[2].str(), format);
                 res.set_content(std::move(exported.content), exported.content_type);
               }));
    server.Get(R"(/sessions/([0-9A-Za-z]+)/trace)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.set_content(service.export_trace(req.matches[1].str()), "application/x-ndjson");
               }));
  }
};

HttpServer::HttpServer(Service& service, std::optional<std::string> api_token)
    : impl_(std::make_unique<Impl>(service, std::move(api_token))) {
  impl_->install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind", host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::InvalidArgument, "cannot bind", host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace vizgen::service
