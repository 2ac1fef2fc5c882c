#include "test_support.hpp"
#include "vizgen/error.hpp"
#include "vizgen/explain/explanation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

namespace vizgen::explain {
namespace {

using analysis::AnomalyFinding;
using analysis::CorrelationFinding;
using analysis::Direction;
using analysis::InsightReport;
using analysis::TrendFinding;
using providers::ScriptedModelAdapter;
using providers::SearchResultItem;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

InsightReport sales_drop() {
  InsightReport r;
  r.findings.emplace_back(TrendFinding{"sales", -120.0, 5000.0, 0.9, Direction::Decreasing});
  r.narrative = "sales shows a decreasing trend.";
  return r;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Fails the given queries, serves the rest from a map.
class FlakySearch : public providers::SearchAdapter {
 public:
  std::map<std::string, std::vector<SearchResultItem>> results;
  std::set<std::string> down;
  std::vector<SearchResultItem> search(const std::string& query, int) override {
    if (down.count(query)) throw Error(ErrorCode::AdapterUnavailable, "outage");
    auto it = results.find(query);
    return it == results.end() ? std::vector<SearchResultItem>{} : it->second;
  }
};

std::vector<SearchResultItem> items(const std::string& prefix, int n) {
  std::vector<SearchResultItem> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"", prefix + std::to_string(i), "https://" + prefix + ".example/" + std::to_string(i), "snippet"});
  }
  return out;
}

TEST(PlanSearches, SalesDropQuery) {
  const auto plan = plan_searches(sales_drop(), "Explain why sales dropped in Q2");
  ASSERT_EQ(plan.queries.size(), 1u);
  const auto words = split(plan.queries[0]);
  for (const char* w : {"sales", "decline", "Q2"}) {
    EXPECT_NE(std::find(words.begin(), words.end(), w), words.end()) << plan.queries[0];
  }
  EXPECT_EQ(std::count(words.begin(), words.end(), "sales"), 1);
  EXPECT_EQ(plan.insight_digest, insight_digest(sales_drop()));
}

TEST(PlanSearches, EmptyInsightIsNoFindings) {
  EXPECT_EQ(code_of([] { plan_searches(InsightReport{}, "why"); }), ErrorCode::NoFindings);
}

TEST(PlanSearches, SevenFindingsGiveThreeQueries) {
  InsightReport r;
  for (int i = 0; i < 7; ++i) {
    r.findings.emplace_back(AnomalyFinding{"f" + std::to_string(i), std::size_t(i), 1.0, 9.0, analysis::AnomalyRule::Mad});
  }
  const auto plan = plan_searches(r, "what happened");
  EXPECT_EQ(plan.queries.size(), 3u);
}

TEST(PlanSearchesProperty, QueriesDistinctBoundedNonEmpty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    InsightReport r;
    const int n = 1 + int(rng() % 8);
    for (int i = 0; i < n; ++i) {
      const std::string field(1 + rng() % 120, char('a' + rng() % 3));
      switch (rng() % 3) {
        case 0: r.findings.emplace_back(TrendFinding{field, 1.0, 0.0, 0.8, Direction::Increasing}); break;
        case 1: r.findings.emplace_back(AnomalyFinding{field, 0, 1.0, -9.0, analysis::AnomalyRule::Mad}); break;
        default: r.findings.emplace_back(CorrelationFinding{field, field + "z", 0.9, 5}); break;
      }
    }
    const std::string question(rng() % 300, 'q');
    const auto plan = plan_searches(r, "explain " + question + " growth Q" + std::to_string(trial));
    ASSERT_FALSE(plan.queries.empty());
    EXPECT_LE(plan.queries.size(), kMaxQueries);
    EXPECT_LE(plan.queries.size(), kQueriesFromFindings);
    std::set<std::string> distinct(plan.queries.begin(), plan.queries.end());
    EXPECT_EQ(distinct.size(), plan.queries.size());
    for (const auto& q : plan.queries) {
      EXPECT_FALSE(q.empty());
      EXPECT_LE(q.size(), kMaxQueryLength);
    }
  }
}

TEST(ExecuteSearchPlan, DeduplicatesByUrl) {
  FlakySearch search;
  SearchPlan plan{{"q one", "q two"}, "", ""};
  search.results["q one"] = items("a", 3);
  auto second = items("b", 3);
  second[1].url = "https://a.example/2";
  search.results["q two"] = second;
  const auto evidence = execute_search_plan(plan, search, 3);
  ASSERT_EQ(evidence.items.size(), 5u);
  EXPECT_EQ(evidence.items[0].url, "https://a.example/0");
  EXPECT_EQ(evidence.items[3].url, "https://b.example/0");
  EXPECT_EQ(evidence.items[3].query, "q two");
  EXPECT_TRUE(evidence.warnings.empty());
  EXPECT_EQ(evidence.plan_digest, digest(Json(plan)));
}

TEST(ExecuteSearchPlan, MissingFixturesGiveEmptyEvidence) {
  testing::TempDir dir;
  providers::StubSearchAdapter stub(dir.path());
  const auto evidence = execute_search_plan(SearchPlan{{"x", "y"}, "", ""}, stub);
  EXPECT_TRUE(evidence.items.empty());
  EXPECT_TRUE(evidence.warnings.empty());
}

TEST(ExecuteSearchPlan, PartialOutageRecordsOneWarning) {
  FlakySearch search;
  search.results["one"] = items("a", 2);
  search.results["two"] = items("b", 2);
  search.results["three"] = items("c", 2);
  search.down = {"two"};
  const auto evidence = execute_search_plan(SearchPlan{{"one", "two", "three"}, "", ""}, search, 3);
  ASSERT_EQ(evidence.items.size(), 4u);
  for (const auto& item : evidence.items) EXPECT_NE(item.query, "two");
  ASSERT_EQ(evidence.warnings.size(), 1u);
  EXPECT_NE(evidence.warnings[0].find("query 2"), std::string::npos);
}

TEST(ExecuteSearchPlan, AllFailedIsWarningOnly) {
  FlakySearch search;
  search.down = {"one"};
  const auto evidence = execute_search_plan(SearchPlan{{"one"}, "", ""}, search);
  EXPECT_TRUE(evidence.items.empty());
  EXPECT_EQ(evidence.warnings.back(), "AllQueriesFailed");
  EXPECT_EQ(code_of([&] { execute_search_plan(SearchPlan{{"one"}, "", ""}, search, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { execute_search_plan(SearchPlan{{"one"}, "", ""}, search, 6); }), ErrorCode::InvalidArgument);
}

TEST(Synthesize, GroundedWithEvidence) {
  EvidenceSet evidence;
  evidence.items = items("news", 2);
  const auto e = synthesize_explanation(sales_drop(), evidence, providers::Providers::offline());
  EXPECT_TRUE(e.grounded);
  ASSERT_FALSE(e.citations.empty());
  for (const auto& c : e.citations) EXPECT_NE(e.text.find(c), std::string::npos);
  EXPECT_EQ(e.text.find(kNoContextMarker), std::string::npos);
  EXPECT_EQ(e.insight_digest, insight_digest(sales_drop()));
}

TEST(Synthesize, UngroundedCarriesMarker) {
  const auto e = synthesize_explanation(sales_drop(), EvidenceSet{}, providers::Providers::offline());
  EXPECT_FALSE(e.grounded);
  EXPECT_TRUE(e.citations.empty());
  EXPECT_NE(e.text.find(kNoContextMarker), std::string::npos);
  EXPECT_NE(e.text.find("sales"), std::string::npos);
  EXPECT_EQ(code_of([] { synthesize_explanation(InsightReport{}, EvidenceSet{}, providers::Providers::offline()); }),
            ErrorCode::NoFindings);
}

TEST(Synthesize, DeterministicWithStubs) {
  testing::TempDir dir;
  const std::string question = "Explain why sales dropped in Q2";
  const auto plan = plan_searches(sales_drop(), question);
  providers::StubSearchAdapter::write_fixture(dir.path(), plan.queries[0], items("retail", 3));
  auto run = [&] {
    providers::StubSearchAdapter stub(dir.path());
    const auto evidence = execute_search_plan(plan_searches(sales_drop(), question), stub);
    return std::make_pair(evidence, synthesize_explanation(sales_drop(), evidence, providers::Providers::offline()));
  };
  const auto [ev1, ex1] = run();
  const auto [ev2, ex2] = run();
  EXPECT_EQ(digest(Json(ev1)), digest(Json(ev2)));
  EXPECT_EQ(digest(Json(ex1)), digest(Json(ex2)));
  EXPECT_EQ(ev1.items.size(), 3u);
  EXPECT_TRUE(ex1.grounded);
}

TEST(Synthesize, JsonRoundTrip) {
  EvidenceSet evidence;
  evidence.items = items("news", 2);
  const auto e = synthesize_explanation(sales_drop(), evidence, providers::Providers::offline());
  EXPECT_EQ(Json(e).get<Explanation>(), e);
  EXPECT_EQ(Json(evidence).get<EvidenceSet>(), evidence);
  const auto plan = plan_searches(sales_drop(), "why");
  EXPECT_EQ(Json(plan).get<SearchPlan>(), plan);
}

// Model replies mixing real and invented urls never leak an invented one.
TEST(SynthesizeProperty, CitationsAreSubsetOfEvidence) {
  std::mt19937_64 rng(12);
  int fabricated_offered = 0;
  for (int trial = 0; trial < 500; ++trial) {
    EvidenceSet evidence;
    evidence.items = items("src" + std::to_string(trial % 5), int(rng() % 4));
    Json cites = Json::array();
    for (int i = int(rng() % 5); i > 0; --i) {
      if (rng() % 2 && !evidence.items.empty()) {
        cites.push_back(evidence.items[rng() % evidence.items.size()].url);
      } else {
        cites.push_back("https://invented.example/" + std::to_string(rng() % 100));
        ++fabricated_offered;
      }
    }
    providers::Providers p;
    p.model = std::make_shared<ScriptedModelAdapter>(std::vector<ScriptedModelAdapter::Step>{
        ScriptedModelAdapter::Step(std::in_place_index<0>, Json{{"text", "model text"}, {"citations", cites}})});
    const auto e = synthesize_explanation(sales_drop(), evidence, p);
    std::set<std::string> known;
    for (const auto& item : evidence.items) known.insert(item.url);
    for (const auto& c : e.citations) EXPECT_TRUE(known.count(c)) << c;
    EXPECT_EQ(e.grounded, !e.citations.empty());
    if (!e.grounded) EXPECT_NE(e.text.find(kNoContextMarker), std::string::npos);
  }
  EXPECT_GT(fabricated_offered, 100);
}

}  // namespace
}  // namespace vizgen::explain
