#pragma once

#include "vizgen/analysis/insights.hpp"
#include "vizgen/json_util.hpp"
#include "vizgen/providers/providers.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vizgen::explain {

inline constexpr char kNoContextMarker[] = "no external context available";
inline constexpr std::size_t kMaxQueries = 5;
inline constexpr std::size_t kQueriesFromFindings = 3;
inline constexpr std::size_t kMaxQueryLength = 200;
inline constexpr int kDefaultResultsPerQuery = 3;
inline constexpr std::size_t kMaxCitations = 3;

struct SearchPlan {
  std::vector<std::string> queries;  // 1..5, distinct, each <= 200 chars
  std::string rationale;
  std::string insight_digest;

  bool operator==(const SearchPlan&) const = default;
};

struct EvidenceSet {
  std::vector<providers::SearchResultItem> items;  // plan order, then adapter order
  std::string plan_digest;
  std::vector<std::string> warnings;

  bool operator==(const EvidenceSet&) const = default;
};

struct Explanation {
  std::string text;
  std::vector<std::string> citations;  // subset of evidence urls
  std::string insight_digest;
  bool grounded = false;  // == !citations.empty()

  bool operator==(const Explanation&) const = default;
};

void to_json(Json& j, const SearchPlan& p);
void from_json(const Json& j, SearchPlan& p);
void to_json(Json& j, const EvidenceSet& e);
void from_json(const Json& j, EvidenceSet& e);
void to_json(Json& j, const Explanation& e);
void from_json(const Json& j, Explanation& e);

std::string insight_digest(const analysis::InsightReport& report);

// Question words that carry domain meaning: original case, stopwords and
// intent vocabulary removed, first occurrence kept.
std::vector<std::string> domain_keywords(std::string_view question);

// One query per top-3 finding: "<field> <growth|decline|spike|drop|correlation>
// <domain keywords>". Throws NoFindings.
SearchPlan plan_searches(const analysis::InsightReport& report, std::string_view question);

// Per-query failures become warnings. Items are deduplicated by url. Throws
// InvalidArgument unless 1 <= k_per_query <= 5.
EvidenceSet execute_search_plan(const SearchPlan& plan, providers::SearchAdapter& adapter,
                                int k_per_query = kDefaultResultsPerQuery);

// Grounded when evidence exists: cites up to three items. Otherwise the text
// summarizes the findings and carries kNoContextMarker. Model citations are
// filtered to evidence urls. Throws NoFindings.
Explanation synthesize_explanation(const analysis::InsightReport& report,
                                   const EvidenceSet& evidence,
                                   const providers::Providers& providers,
                                   providers::ModelUsage* usage = nullptr);

}  // namespace vizgen::explain
