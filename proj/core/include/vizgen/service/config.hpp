#pragma once

#include "vizgen/providers/providers.hpp"
#include "vizgen/workflow/engine.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace vizgen::service {

// Flat key=value file; '#' starts a comment, values may be double-quoted.
//
//   state_dir = "/var/lib/vizgen"
//   port = 8080
//   row_cap = 10000
//   trend_min_r2 = 0.5
//   model_fixtures = fixtures/model
struct ServiceConfig {
  std::filesystem::path state_dir = "vizgen-state";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> api_token;  // bearer token for every endpoint

  workflow::TurnConfig turn;
  std::chrono::milliseconds model_deadline = providers::kDefaultDeadline;
  int model_max_retries = providers::kDefaultMaxRetries;

  // Stub directories win over endpoints; endpoints win over the environment.
  std::optional<std::filesystem::path> model_fixtures;
  std::optional<std::filesystem::path> search_fixtures;
  std::optional<std::string> model_endpoint;
  std::optional<std::string> model_key;
  std::optional<std::string> search_endpoint;
  std::optional<std::string> search_key;

  // Throws InvalidArgument naming the offending key or line.
  static ServiceConfig parse(std::string_view text);
  static ServiceConfig load(const std::filesystem::path& file);

  providers::Providers make_providers() const;
};

}  // namespace vizgen::service
