#include "vizgen/providers/search.hpp"

#include "vizgen/error.hpp"
#include "vizgen/providers/providers.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <regex>

namespace vizgen::providers {

void to_json(Json& j, const SearchResultItem& item) {
  j = Json{{"query", item.query}, {"title", item.title}, {"url", item.url}, {"snippet", item.snippet}};
}

void from_json(const Json& j, SearchResultItem& item) {
  item.query = j.value("query", "");
  item.title = j.value("title", "");
  item.url = j.value("url", "");
  item.snippet = j.value("snippet", "");
}

bool is_valid_url(std::string_view url) {
  static const std::regex pattern(R"(^https?://[A-Za-z0-9.-]+(:[0-9]{1,5})?([/?#][^\s]*)?$)",
                                  std::regex::icase);
  return std::regex_match(url.begin(), url.end(), pattern);
}

std::string normalize_query(std::string_view query) {
  std::string out;
  bool pending_space = false;
  for (char c : query) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<SearchResultItem> NullSearchAdapter::search(const std::string&, int) {
  throw Error(ErrorCode::AdapterUnavailable, "search provider disabled");
}

std::filesystem::path StubSearchAdapter::fixture_path(const std::filesystem::path& dir,
                                                      std::string_view query) {
  return dir / (sha256_hex(normalize_query(query)) + ".json");
}

std::vector<SearchResultItem> StubSearchAdapter::search(const std::string& query, int) {
  std::ifstream in(fixture_path(dir_, query));
  if (!in) return {};
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::AdapterUnavailable, std::string("bad search fixture: ") + e.what());
  }
  std::vector<SearchResultItem> items;
  for (const auto& item : doc.value("items", Json::array())) {
    items.push_back(item.get<SearchResultItem>());
  }
  return items;
}

void StubSearchAdapter::write_fixture(const std::filesystem::path& dir, std::string_view query,
                                      const std::vector<SearchResultItem>& items) {
  std::filesystem::create_directories(dir);
  Json doc{{"query", std::string(query)}, {"items", Json::array()}};
  for (const auto& item : items) {
    doc["items"].push_back({{"title", item.title}, {"url", item.url}, {"snippet", item.snippet}});
  }
  std::ofstream out(fixture_path(dir, query));
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write search fixture");
}

std::vector<SearchResultItem> search(SearchAdapter& adapter, const std::string& query, int k) {
  if (k < 1 || k > 10) throw Error(ErrorCode::InvalidArgument, "k must be in [1, 10]");
  std::vector<SearchResultItem> out;
  for (auto& item : adapter.search(query, k)) {
    if (static_cast<int>(out.size()) >= k) break;
    if (!is_valid_url(item.url)) continue;
    item.query = query;
    if (item.snippet.size() > kMaxSnippetLength) item.snippet.resize(kMaxSnippetLength);
    out.push_back(std::move(item));
  }
  return out;
}

const std::shared_ptr<ModelAdapter>& Providers::model_for(TaskTag tag) const {
  auto it = model_by_task.find(tag);
  return it != model_by_task.end() && it->second ? it->second : model;
}

Providers Providers::offline() { return Providers{}; }

Providers Providers::from_fixtures(const std::optional<std::filesystem::path>& model_dir,
                                   const std::optional<std::filesystem::path>& search_dir) {
  Providers p;
  if (model_dir) p.model = std::make_shared<FixtureModelAdapter>(*model_dir);
  if (search_dir) p.search = std::make_shared<StubSearchAdapter>(*search_dir);
  return p;
}

Providers Providers::from_env() {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  Providers p;
  if (auto endpoint = env("MODEL_ENDPOINT"); !endpoint.empty()) {
    p.model = std::make_shared<HttpModelAdapter>(endpoint, env("MODEL_KEY"));
  }
  if (auto endpoint = env("SEARCH_ENDPOINT"); !endpoint.empty()) {
    p.search = std::make_shared<HttpSearchAdapter>(endpoint, env("SEARCH_KEY"));
  }
  return p;
}

Completion complete(const Providers& providers, const StructuredPrompt& prompt,
                    ModelUsage* usage) {
  try {
    Completion c = invoke_with_repair(prompt, providers.model_for(prompt.task_tag),
                                      providers.max_retries, providers.deadline);
    if (usage) usage->attempts += c.attempts;
    return c;
  } catch (const Error& e) {
    if (usage) {
      if (e.code() == ErrorCode::SchemaViolation) usage->attempts += providers.max_retries + 1;
      if (e.code() == ErrorCode::Timeout) usage->attempts += 1;
      usage->failure = std::string(to_string(e.code())) + ": " + e.message();
    }
    throw;
  }
}

}  // namespace vizgen::providers
