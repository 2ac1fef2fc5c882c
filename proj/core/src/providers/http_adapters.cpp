#include "vizgen/error.hpp"
#include "vizgen/providers/model.hpp"
#include "vizgen/providers/search.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <regex>

namespace vizgen::providers {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) {
    throw Error(ErrorCode::AdapterUnavailable, "invalid endpoint url");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

httplib::Headers auth_headers(const std::string& key) {
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  return headers;
}

}  // namespace

HttpModelAdapter::HttpModelAdapter(std::string endpoint, std::string key)
    : endpoint_(std::move(endpoint)), key_(std::move(key)) {}

Json HttpModelAdapter::complete(const StructuredPrompt& prompt) {
  const Endpoint ep = split_endpoint(endpoint_);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  const Json body{{"task_tag", to_string(prompt.task_tag)},
                  {"context", prompt.context},
                  {"output_schema", schema_to_json(prompt.output_schema)}};
  auto res = client.Post(ep.path, auth_headers(key_), body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::AdapterUnavailable, "model endpoint unreachable: " +
                                                   httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::AdapterUnavailable, "model endpoint returned " + std::to_string(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception&) {
    throw Error(ErrorCode::SchemaViolation, "model reply is not JSON");
  }
}

HttpSearchAdapter::HttpSearchAdapter(std::string endpoint, std::string key)
    : endpoint_(std::move(endpoint)), key_(std::move(key)) {}

std::vector<SearchResultItem> HttpSearchAdapter::search(const std::string& query, int k) {
  const Endpoint ep = split_endpoint(endpoint_);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  const httplib::Params params{{"q", query}, {"k", std::to_string(k)}};
  auto res = client.Get(ep.path, params, auth_headers(key_));
  if (!res || res->status != 200) {
    throw Error(ErrorCode::AdapterUnavailable, "search endpoint unavailable");
  }
  std::vector<SearchResultItem> items;
  try {
    for (const auto& item : Json::parse(res->body).value("items", Json::array())) {
      items.push_back(item.get<SearchResultItem>());
    }
  } catch (const Json::exception&) {
    throw Error(ErrorCode::AdapterUnavailable, "search reply is not JSON");
  }
  return items;
}

}  // namespace vizgen::providers
