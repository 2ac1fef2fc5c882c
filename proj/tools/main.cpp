#include "vizgen/service/http_server.hpp"
#include "vizgen/service/service.hpp"
#include "vizgen/sql/database.hpp"
#include "vizgen/sql/fixture.hpp"
#include "vizgen/workflow/engine.hpp"
#include "vizgen/workflow/nodes.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using namespace vizgen;

constexpr char kCliSession[] = "cli";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read file", path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write file", path.string());
  out << content;
}

struct ProviderFlags {
  std::string config_file;
  std::string model_fixtures;
  std::string search_fixtures;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--model-fixtures", model_fixtures, "directory of recorded model replies");
    cmd.add_option("--search-fixtures", search_fixtures, "directory of recorded search results");
  }

  service::ServiceConfig config() const {
    auto c = config_file.empty() ? service::ServiceConfig{} : service::ServiceConfig::load(config_file);
    if (!model_fixtures.empty()) c.model_fixtures = model_fixtures;
    if (!search_fixtures.empty()) c.search_fixtures = search_fixtures;
    return c;
  }
};

sql::ConnectionConfig connection_from_flag(const std::string& db) {
  if (auto parsed = workflow::connection_from_text(db)) return *parsed;
  return sql::ConnectionConfig{sql::Dialect::Embedded, db, true};
}

int run_serve(const ProviderFlags& flags, const std::string& host, int port, const std::string& state_dir) {
  auto config = flags.config();
  if (!host.empty()) config.host = host;
  if (port > 0) config.port = port;
  if (!state_dir.empty()) config.state_dir = state_dir;
  service::Service svc(config, config.make_providers());
  service::HttpServer server(svc, config.api_token);
  const int bound = server.bind(config.host, config.port);
  std::cout << "listening on " << config.host << ":" << bound << std::endl;
  static service::HttpServer* active = nullptr;
  active = &server;
  std::signal(SIGINT, [](int) { if (active) active->stop(); });
  std::signal(SIGTERM, [](int) { if (active) active->stop(); });
  server.serve();
  return 0;
}

int run_ask(const ProviderFlags& flags, const std::string& db, const std::vector<std::string>& questions,
            const std::string& record_dir, bool as_json) {
  const auto config = flags.config();
  const auto providers = config.make_providers();
  const workflow::TurnOptions options{config.turn, system_clock()};

  workflow::ConversationState state;
  state.session_id = kCliSession;
  const auto connection = connection_from_flag(db);
  state.schema_cache = sql::retrieve_metadata(connection, *system_clock());
  state.active_connection = connection;

  int failures = 0;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const workflow::UserMessage message{kCliSession, questions[i], system_clock()->now(), std::nullopt};
    auto result = workflow::run_turn(state, message, workflow::default_graph(), providers, options);
    if (!record_dir.empty()) {
      const auto dir = fs::path(record_dir) / ("turn-" + std::to_string(i + 1));
      fs::create_directories(dir);
      write_file(dir / "state_before.json", workflow::serialize_state(state));
      write_file(dir / "message.json", canonical(Json(message)));
      write_file(dir / "trace.ndjson", workflow::trace_to_ndjson(result.trace));
      write_file(dir / "bundle.json", canonical(Json(result.bundle)));
    }
    const Json shown = service::redact_secrets(Json(result.bundle));
    if (as_json) {
      std::cout << shown.dump(2) << "\n";
    } else {
      std::cout << shown.at("message").get<std::string>() << "\n";
      for (const auto& w : result.bundle.warnings) std::cerr << "warning: " << w << "\n";
    }
    for (const auto& e : result.bundle.errors) {
      std::cerr << "error: " << to_string(e.code) << ": " << sql::redact_location(e.message) << "\n";
      ++failures;
    }
    state = std::move(result.state);
  }
  return failures == 0 ? 0 : 2;
}

int run_replay(const ProviderFlags& flags, const std::string& trace_file, const std::string& state_file,
               const std::string& message_file) {
  const auto config = flags.config();
  const auto recorded = workflow::trace_from_ndjson(read_file(trace_file));
  const auto state = workflow::parse_state(read_file(state_file));
  const auto message = Json::parse(read_file(message_file)).get<workflow::UserMessage>();
  const auto result = workflow::replay_trace(state, message, recorded, workflow::default_graph(),
                                             config.make_providers(), {config.turn, system_clock()});
  std::cout << "replay matched " << recorded.size() << " trace events\n";
  std::cout << result.bundle.message << "\n";
  return 0;
}

int run_seed(const std::string& out, std::int64_t rows, std::uint64_t seed) {
  sql::write_sales_fixture(out, rows, seed);
  std::cout << out << " sha256=" << sql::file_checksum(out) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vizgen: conversational data exploration over SQL databases"};
  app.require_subcommand(1);

  ProviderFlags serve_flags;
  std::string host;
  int port = 0;
  std::string state_dir;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve_flags.attach(*serve);
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--state-dir", state_dir, "session document directory");

  ProviderFlags ask_flags;
  std::string db;
  std::vector<std::string> questions;
  std::string record_dir;
  bool as_json = false;
  auto* ask = app.add_subcommand("ask", "answer questions against a database without the server");
  ask_flags.attach(*ask);
  ask->add_option("--db", db, "database file path or DSN")->required();
  ask->add_option("--question,-q", questions, "question; repeat for a multi-turn conversation")->required();
  ask->add_option("--record", record_dir, "write state, message, trace and bundle per turn");
  ask->add_flag("--json", as_json, "print the full response bundle");

  ProviderFlags replay_flags;
  std::string trace_file, state_file, message_file;
  auto* replay = app.add_subcommand("replay", "re-run a recorded turn and verify its trace digests");
  replay_flags.attach(*replay);
  replay->add_option("--trace", trace_file, "NDJSON trace of the turn")->required()->check(CLI::ExistingFile);
  replay->add_option("--state", state_file, "state before the turn")->required()->check(CLI::ExistingFile);
  replay->add_option("--message", message_file, "the turn's user message")->required()->check(CLI::ExistingFile);

  std::string seed_out;
  std::int64_t seed_rows = 1000;
  std::uint64_t seed_value = sql::kFixtureSeed;
  auto* seed = app.add_subcommand("seed-fixture", "write the deterministic sales database");
  seed->add_option("--out", seed_out, "output database path")->required();
  seed->add_option("--rows", seed_rows, "row count")->check(CLI::PositiveNumber);
  seed->add_option("--seed", seed_value, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(serve_flags, host, port, state_dir);
    if (*ask) return run_ask(ask_flags, db, questions, record_dir, as_json);
    if (*replay) return run_replay(replay_flags, trace_file, state_file, message_file);
    if (*seed) return run_seed(seed_out, seed_rows, seed_value);
  } catch (const Error& e) {
    std::cerr << "vizgen: " << sql::redact_location(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vizgen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
