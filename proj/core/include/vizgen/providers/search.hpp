#pragma once

#include "vizgen/json_util.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::providers {

inline constexpr std::size_t kMaxSnippetLength = 1000;

struct SearchResultItem {
  std::string query;
  std::string title;
  std::string url;
  std::string snippet;  // at most kMaxSnippetLength characters

  bool operator==(const SearchResultItem&) const = default;
};

void to_json(Json& j, const SearchResultItem& item);
void from_json(const Json& j, SearchResultItem& item);

// http(s)://host[:port][/...] with a non-empty host and no whitespace.
bool is_valid_url(std::string_view url);

// Lowercased, whitespace runs collapsed, trimmed.
std::string normalize_query(std::string_view query);

class SearchAdapter {
 public:
  virtual ~SearchAdapter() = default;
  virtual bool enabled() const { return true; }
  // Items in adapter order; may return more than k. Throws AdapterUnavailable.
  virtual std::vector<SearchResultItem> search(const std::string& query, int k) = 0;
};

class NullSearchAdapter final : public SearchAdapter {
 public:
  bool enabled() const override { return false; }
  std::vector<SearchResultItem> search(const std::string& query, int k) override;
};

// Serves <dir>/<sha256(normalize_query(q))>.json with content
// {"query": q, "items": [{"title", "url", "snippet"}, ...]}. No fixture means
// no results.
class StubSearchAdapter final : public SearchAdapter {
 public:
  explicit StubSearchAdapter(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::vector<SearchResultItem> search(const std::string& query, int k) override;

  static std::filesystem::path fixture_path(const std::filesystem::path& dir,
                                            std::string_view query);
  static void write_fixture(const std::filesystem::path& dir, std::string_view query,
                            const std::vector<SearchResultItem>& items);

 private:
  std::filesystem::path dir_;
};

// GET <endpoint>?q=<query>&k=<k>, response {"items": [...]}.
class HttpSearchAdapter final : public SearchAdapter {
 public:
  HttpSearchAdapter(std::string endpoint, std::string key);
  std::vector<SearchResultItem> search(const std::string& query, int k) override;

 private:
  std::string endpoint_;
  std::string key_;
};

// Requires 1 <= k <= 10 (InvalidArgument). Returns at most k items, drops
// items with invalid urls, clips snippets, stamps each item with `query`.
std::vector<SearchResultItem> search(SearchAdapter& adapter, const std::string& query, int k);

}  // namespace vizgen::providers
