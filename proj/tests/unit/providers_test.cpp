#include "test_support.hpp"
#include "vizgen/error.hpp"
#include "vizgen/providers/providers.hpp"
#include "vizgen/providers/search.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <random>
#include <thread>

namespace vizgen::providers {
namespace {

using namespace std::chrono_literals;
using Script = std::vector<ScriptedModelAdapter::Step>;

ScriptedModelAdapter::Step reply(const Json& j) { return ScriptedModelAdapter::Step(std::in_place_index<0>, j); }

StructuredPrompt sql_prompt() {
  return {TaskTag::SqlGenerate, "question: sales by month",
          {{"sql", FieldKind::String, true}, {"tables", FieldKind::Array, true}, {"note", FieldKind::String, false}}};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

// Independent conformance check, written against the field-kind table.
bool conforms(const Json& v, const std::vector<FieldSpec>& schema) {
  if (!v.is_object()) return false;
  for (const auto& f : schema) {
    if (!v.contains(f.name)) {
      if (f.required) return false;
      continue;
    }
    const Json& x = v.at(f.name);
    bool ok = false;
    switch (f.kind) {
      case FieldKind::String: ok = x.is_string(); break;
      case FieldKind::Number: ok = x.is_number(); break;
      case FieldKind::Boolean: ok = x.is_boolean(); break;
      case FieldKind::Array: ok = x.is_array(); break;
      case FieldKind::Object: ok = x.is_object(); break;
    }
    if (!ok) return false;
  }
  return true;
}

const Json kValid{{"sql", "SELECT 1"}, {"tables", Json::array()}};
const Json kMalformed{{"sql", 42}};

TEST(InvokeWithRepair, ValidFirstReplyUsesOneAttempt) {
  auto adapter = std::make_shared<ScriptedModelAdapter>(Script{reply(kValid)});
  const auto c = invoke_with_repair(sql_prompt(), adapter);
  EXPECT_EQ(c.value, kValid);
  EXPECT_EQ(c.attempts, 1);
  EXPECT_EQ(adapter->calls(), 1);
}

TEST(InvokeWithRepair, TwoMalformedThenValidRecordsTwoRetries) {
  auto adapter = std::make_shared<ScriptedModelAdapter>(Script{reply(kMalformed), reply(kMalformed), reply(kValid)});
  const auto c = complete_structured(sql_prompt(), adapter);
  EXPECT_EQ(c.value, kValid);
  EXPECT_EQ(c.attempts, 3);
  const auto prompts = adapter->prompts();
  ASSERT_EQ(prompts.size(), 3u);
  EXPECT_EQ(prompts[0].context, sql_prompt().context);
  EXPECT_NE(prompts[1].context.find("Previous reply was invalid"), std::string::npos);
  EXPECT_NE(prompts[1].context.find("sql"), std::string::npos);
}

TEST(InvokeWithRepair, AlwaysMalformedStopsAfterExactlyThreeAttempts) {
  auto adapter = std::make_shared<ScriptedModelAdapter>(Script{reply(kMalformed)});
  EXPECT_EQ(code_of([&] { invoke_with_repair(sql_prompt(), adapter, 2); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(adapter->calls(), 3);
}

TEST(InvokeWithRepair, ZeroRetriesFailsImmediately) {
  auto adapter = std::make_shared<ScriptedModelAdapter>(Script{reply(kMalformed), reply(kValid)});
  EXPECT_EQ(code_of([&] { invoke_with_repair(sql_prompt(), adapter, 0); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(adapter->calls(), 1);
}

TEST(InvokeWithRepair, DeadlineExpiryIsTimeout) {
  auto adapter = std::make_shared<ScriptedModelAdapter>(Script{ScriptedModelAdapter::Delay{2s, kValid}});
  const auto started = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { invoke_with_repair(sql_prompt(), adapter, 2, 50ms); }), ErrorCode::Timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - started, 1s);
}

TEST(InvokeWithRepair, DisabledAndFailingAdapters) {
  EXPECT_EQ(code_of([] { invoke_with_repair(sql_prompt(), std::make_shared<NullModelAdapter>()); }),
            ErrorCode::AdapterUnavailable);
  auto failing = std::make_shared<ScriptedModelAdapter>(Script{ScriptedModelAdapter::Fail{"down"}});
  EXPECT_EQ(code_of([&] { invoke_with_repair(sql_prompt(), failing); }), ErrorCode::AdapterUnavailable);
  EXPECT_EQ(code_of([&] { invoke_with_repair(sql_prompt(), failing, -1); }), ErrorCode::InvalidArgument);
}

// Property: any successful completion conforms to the schema.
TEST(InvokeWithRepairProperty, SuccessfulOutputsConform) {
  const std::vector<Json> candidates = {
      kValid,        kMalformed,
      Json::array(), Json("text"),
      Json{{"sql", "x"}, {"tables", Json::array()}, {"note", 3}},
      Json{{"sql", "x"}, {"tables", {1, 2}}, {"note", "n"}},
      Json{{"tables", Json::array()}},
      Json{{"sql", "x"}, {"tables", Json::object()}},
  };
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    Script script;
    for (int i = 0; i < 4; ++i) script.push_back(reply(candidates[pick(rng)]));
    auto adapter = std::make_shared<ScriptedModelAdapter>(script);
    try {
      const auto c = invoke_with_repair(sql_prompt(), adapter);
      EXPECT_TRUE(conforms(c.value, sql_prompt().output_schema)) << c.value.dump();
      EXPECT_EQ(c.attempts, adapter->calls());
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
      EXPECT_EQ(adapter->calls(), 3);
    }
  }
}

TEST(SchemaViolation, DescribesFirstProblem) {
  const auto schema = sql_prompt().output_schema;
  EXPECT_FALSE(schema_violation(kValid, schema));
  EXPECT_TRUE(schema_violation(Json::array(), schema));
  EXPECT_TRUE(schema_violation(Json{{"tables", Json::array()}}, schema));
  EXPECT_TRUE(schema_violation(Json{{"sql", "x"}, {"tables", Json::array()}, {"note", 1}}, schema));
}

TEST(FixtureModelAdapter, ServesFixtureVerbatimAndDeterministically) {
  testing::TempDir dir;
  const Json reply{{"sql", "SELECT month FROM sales"}, {"tables", {"sales"}}};
  FixtureModelAdapter::write_fixture(dir.path(), sql_prompt(), reply);
  auto adapter = std::make_shared<FixtureModelAdapter>(dir.path());
  EXPECT_EQ(complete_structured(sql_prompt(), adapter).value, reply);
  EXPECT_EQ(complete_structured(sql_prompt(), adapter).value, reply);
  auto other = sql_prompt();
  other.context += "!";
  EXPECT_EQ(code_of([&] { complete_structured(other, adapter); }), ErrorCode::AdapterUnavailable);
}

TEST(FixtureKey, DependsOnTagAndContext) {
  auto a = sql_prompt();
  auto b = a;
  b.task_tag = TaskTag::IntentRefine;
  auto c = a;
  c.context = "other";
  EXPECT_EQ(fixture_key(a), fixture_key(sql_prompt()));
  EXPECT_NE(fixture_key(a), fixture_key(b));
  EXPECT_NE(fixture_key(a), fixture_key(c));
  EXPECT_EQ(fixture_key(a), sha256_hex("sql_generate:" + sha256_hex(a.context)));
}

TEST(TaskTags, FixedRegistry) {
  for (const char* name : {"intent_refine", "sql_generate", "insight_narrate", "explain_synthesize", "customize_parse"}) {
    const auto tag = task_tag_from_string(name);
    ASSERT_TRUE(tag) << name;
    EXPECT_EQ(to_string(*tag), name);
  }
  EXPECT_FALSE(task_tag_from_string("chat"));
}

TEST(Complete, AccountsAttemptsAcrossCalls) {
  Providers p;
  p.model = std::make_shared<ScriptedModelAdapter>(Script{reply(kMalformed), reply(kValid)});
  ModelUsage usage;
  complete(p, sql_prompt(), &usage);
  EXPECT_EQ(usage.attempts, 2);
  p.model = std::make_shared<ScriptedModelAdapter>(Script{reply(kMalformed)});
  EXPECT_THROW(complete(p, sql_prompt(), &usage), Error);
  EXPECT_EQ(usage.attempts, 5);
  ASSERT_TRUE(usage.failure);
  EXPECT_EQ(usage.failure->rfind("SchemaViolation", 0), 0u);
}

TEST(Providers, PerTaskOverride) {
  Providers p;
  auto special = std::make_shared<ScriptedModelAdapter>(Script{reply(kValid)});
  p.model_by_task[TaskTag::SqlGenerate] = special;
  EXPECT_EQ(p.model_for(TaskTag::SqlGenerate), special);
  EXPECT_FALSE(p.model_for(TaskTag::IntentRefine)->enabled());
}

std::vector<SearchResultItem> three_items() {
  return {{"", "Retail slump", "https://news.example/a", "Sales fell in Q2."},
          {"", "Analyst view", "https://blog.example/b", "Demand cooled."},
          {"", "Data", "https://stats.example/c", "Official figures."}};
}

TEST(Search, StubServesFixtureInOrder) {
  testing::TempDir dir;
  StubSearchAdapter::write_fixture(dir.path(), "q2 retail sales decline", three_items());
  StubSearchAdapter adapter(dir.path());
  const auto items = search(adapter, "  Q2   retail sales DECLINE ", 10);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].url, "https://news.example/a");
  EXPECT_EQ(items[2].url, "https://stats.example/c");
  for (const auto& i : items) EXPECT_EQ(i.query, "  Q2   retail sales DECLINE ");
}

TEST(Search, KOneReturnsFirstItem) {
  testing::TempDir dir;
  StubSearchAdapter::write_fixture(dir.path(), "q2 retail sales decline", three_items());
  StubSearchAdapter adapter(dir.path());
  const auto items = search(adapter, "q2 retail sales decline", 1);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].title, "Retail slump");
}

TEST(Search, MissingFixtureIsEmptyNotError) {
  testing::TempDir dir;
  StubSearchAdapter adapter(dir.path());
  EXPECT_TRUE(search(adapter, "nothing here", 3).empty());
}

TEST(Search, KOutOfRange) {
  testing::TempDir dir;
  StubSearchAdapter adapter(dir.path());
  EXPECT_EQ(code_of([&] { search(adapter, "q", 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { search(adapter, "q", 11); }), ErrorCode::InvalidArgument);
  NullSearchAdapter null;
  EXPECT_EQ(code_of([&] { search(null, "q", 3); }), ErrorCode::AdapterUnavailable);
}

TEST(Search, DropsInvalidUrlsAndClipsSnippets) {
  testing::TempDir dir;
  StubSearchAdapter::write_fixture(dir.path(), "q",
                                   {{"", "bad", "not a url", "x"},
                                    {"", "ftp", "ftp://files.example/x", "x"},
                                    {"", "long", "https://ok.example", std::string(1500, 'a')}});
  StubSearchAdapter adapter(dir.path());
  const auto items = search(adapter, "q", 10);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].snippet.size(), kMaxSnippetLength);
}

TEST(Urls, Syntax) {
  EXPECT_TRUE(is_valid_url("https://example.com"));
  EXPECT_TRUE(is_valid_url("http://example.com:8080/a?b=c#d"));
  EXPECT_FALSE(is_valid_url("https://"));
  EXPECT_FALSE(is_valid_url("https://exa mple.com"));
  EXPECT_FALSE(is_valid_url("javascript:alert(1)"));
  EXPECT_EQ(normalize_query("  A   b\tC "), "a b c");
}

// A local stand-in for the live endpoints.
class FakeEndpoints : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/complete", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = Json::parse(req.body);
      res.set_content(kValid.dump(), "application/json");
    });
    server_.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      Json items = Json::array();
      items.push_back({{"title", req.get_param_value("q")}, {"url", "https://r.example/1"}, {"snippet", "s"}});
      res.set_content(Json{{"items", items}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string last_auth_;
  Json last_body_;
};

TEST_F(FakeEndpoints, HttpModelAdapterPostsPrompt) {
  auto adapter = std::make_shared<HttpModelAdapter>(base() + "/complete", "k123");
  EXPECT_EQ(complete_structured(sql_prompt(), adapter).value, kValid);
  EXPECT_EQ(last_auth_, "Bearer k123");
  EXPECT_EQ(last_body_.at("task_tag"), "sql_generate");
  EXPECT_EQ(last_body_.at("context"), sql_prompt().context);
}

TEST_F(FakeEndpoints, HttpSearchAdapterReadsItems) {
  HttpSearchAdapter adapter(base() + "/search", "");
  const auto items = search(adapter, "retail", 3);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].title, "retail");
  EXPECT_EQ(last_auth_, "");
}

TEST_F(FakeEndpoints, UnreachableEndpointIsUnavailable) {
  auto adapter = std::make_shared<HttpModelAdapter>(base() + "/missing", "");
  EXPECT_EQ(code_of([&] { complete_structured(sql_prompt(), adapter); }), ErrorCode::AdapterUnavailable);
}

}  // namespace
}  // namespace vizgen::providers
