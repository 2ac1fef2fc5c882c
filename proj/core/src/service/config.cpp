#include "vizgen/service/config.hpp"

#include "vizgen/providers/model.hpp"
#include "vizgen/providers/search.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vizgen::service {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::InvalidArgument, "expected a number, got '" + value + "'", key);
  }
  return out;
}

template <typename T>
T positive(const std::string& key, const std::string& value) {
  const T v = parse_number<T>(key, value);
  if (v <= 0) throw Error(ErrorCode::InvalidArgument, "must be positive", key);
  return v;
}

using Setter = std::function<void(ServiceConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"state_dir", [](auto& c, auto&, auto& v) { c.state_dir = v; }},
      {"host", [](auto& c, auto&, auto& v) { c.host = v; }},
      {"port", [](auto& c, auto& k, auto& v) { c.port = positive<int>(k, v); }},
      {"api_token", [](auto& c, auto&, auto& v) { c.api_token = v; }},
      {"row_cap", [](auto& c, auto& k, auto& v) { c.turn.row_cap = positive<std::int64_t>(k, v); }},
      {"query_deadline_ms", [](auto& c, auto& k, auto& v) { c.turn.deadline_ms = positive<std::int64_t>(k, v); }},
      {"default_limit", [](auto& c, auto& k, auto& v) { c.turn.default_limit = positive<std::int64_t>(k, v); }},
      {"search_results_per_query",
       [](auto& c, auto& k, auto& v) { c.turn.results_per_query = positive<int>(k, v); }},
      {"trend_min_r2", [](auto& c, auto& k, auto& v) { c.turn.thresholds.min_r2 = parse_number<double>(k, v); }},
      {"anomaly_score",
       [](auto& c, auto& k, auto& v) { c.turn.thresholds.anomaly_score = positive<double>(k, v); }},
      {"min_abs_correlation",
       [](auto& c, auto& k, auto& v) { c.turn.thresholds.min_abs_correlation = parse_number<double>(k, v); }},
      {"min_pairs", [](auto& c, auto& k, auto& v) { c.turn.thresholds.min_pairs = positive<std::size_t>(k, v); }},
      {"model_deadline_ms",
       [](auto& c, auto& k, auto& v) { c.model_deadline = std::chrono::milliseconds(positive<std::int64_t>(k, v)); }},
      {"model_max_retries", [](auto& c, auto& k, auto& v) {
         c.model_max_retries = parse_number<int>(k, v);
         if (c.model_max_retries < 0) throw Error(ErrorCode::InvalidArgument, "must be >= 0", k);
       }},
      {"model_fixtures", [](auto& c, auto&, auto& v) { c.model_fixtures = v; }},
      {"search_fixtures", [](auto& c, auto&, auto& v) { c.search_fixtures = v; }},
      {"model_endpoint", [](auto& c, auto&, auto& v) { c.model_endpoint = v; }},
      {"model_key", [](auto& c, auto&, auto& v) { c.model_key = v; }},
      {"search_endpoint", [](auto& c, auto&, auto& v) { c.search_endpoint = v; }},
      {"search_key", [](auto& c, auto&, auto& v) { c.search_key = v; }},
      {"lexicon_file", [](auto& c, auto&, auto& v) {
         auto lexicon = intent::Lexicon::defaults();
         lexicon.extend(intent::Lexicon::load(v));
         c.turn.lexicon = std::make_shared<const intent::Lexicon>(std::move(lexicon));
       }},
      {"chart_rules_file", [](auto& c, auto&, auto& v) {
         c.turn.rules = std::make_shared<const viz::RuleTable>(viz::RuleTable::load(v));
       }},
  };
  return table;
}

}  // namespace

ServiceConfig ServiceConfig::parse(std::string_view text) {
  ServiceConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = line;
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '"') quoted = !quoted;
      if (body[i] == '#' && !quoted) {
        body.resize(i);
        break;
      }
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "expected key = value", "line " + std::to_string(line_no));
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    auto value = trim(std::string_view(body).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorCode::InvalidArgument, "unknown configuration key", key);
    it->second(config, key, value);
  }
  return config;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read configuration file", file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

providers::Providers ServiceConfig::make_providers() const {
  auto p = providers::Providers::from_env();
  if (model_endpoint) p.model = std::make_shared<providers::HttpModelAdapter>(*model_endpoint, model_key.value_or(""));
  if (search_endpoint) {
    p.search = std::make_shared<providers::HttpSearchAdapter>(*search_endpoint, search_key.value_or(""));
  }
  if (model_fixtures) p.model = std::make_shared<providers::FixtureModelAdapter>(*model_fixtures);
  if (search_fixtures) p.search = std::make_shared<providers::StubSearchAdapter>(*search_fixtures);
  p.deadline = model_deadline;
  p.max_retries = model_max_retries;
  return p;
}

}  // namespace vizgen::service
