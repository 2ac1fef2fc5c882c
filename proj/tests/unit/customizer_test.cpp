#include "test_support.hpp"
#include "vizgen/customize/customizer.hpp"
#include "vizgen/error.hpp"
#include "vizgen/viz/builder.hpp"

#include <gtest/gtest.h>

#include <fmt/format.h>

#include <random>
#include <set>

namespace vizgen::customize {
namespace {

using sql::SemanticType;
using viz::ChartSpec;
using viz::ChartType;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

ChartSpec monthly_bar() {
  std::vector<Value> month, amount;
  for (int m = 1; m <= 12; ++m) {
    month.emplace_back(fmt::format("2024-{:02}-01", m));
    amount.emplace_back(double(m * 7 % 13));
  }
  auto raw = testing::make_table({{"month", SemanticType::Temporal, month}, {"amount", SemanticType::Quantitative, amount}});
  raw.source_sql = "SELECT month, amount FROM m";
  const auto pre = viz::preprocess(raw);
  return viz::build_chart_spec(ChartType::Bar, pre.profiles, pre.table, "");
}

ChartSpec region_scatter() {
  auto raw = testing::make_table({{"region", SemanticType::Categorical, {"n", "s", "e", "w"}},
                                  {"price", SemanticType::Quantitative, {1.0, 2.0, 3.0, 4.0}},
                                  {"units", SemanticType::Quantitative, {4.0, 3.0, 5.0, 1.0}}});
  const auto pre = viz::preprocess(raw);
  return viz::build_chart_spec(ChartType::Scatter, pre.profiles, pre.table, "");
}

// JSON-pointer paths a structural diff reports between two specs.
std::set<std::string> changed_paths(const ChartSpec& a, const ChartSpec& b) {
  std::set<std::string> out;
  for (const auto& op : Json::diff(Json(a), Json(b))) out.insert(op.at("path").get<std::string>());
  return out;
}

ChartPatch patch_of(const ChartSpec& c, std::vector<PatchOp> ops) { return {c.chart_id, std::move(ops)}; }

TEST(LexiconParse, ChangeColorToBlue) {
  const auto chart = monthly_bar();
  const auto patch = parse_customization("Change the color of this chart to blue", chart, providers::Providers::offline());
  EXPECT_EQ(patch.target_chart, chart.chart_id);
  ASSERT_EQ(patch.ops.size(), 1u);
  EXPECT_EQ(patch.ops[0], (PatchOp{OpKind::Set, "style.mark_color", Json("blue")}));
}

TEST(LexiconParse, Phrasings) {
  const auto chart = monthly_bar();
  auto ops = [&](std::string_view cmd) { return lexicon_parse(cmd, chart).ops; };
  EXPECT_EQ(ops("make it a line chart"), (std::vector<PatchOp>{{OpKind::Set, "mark", Json("line")}}));
  EXPECT_EQ(ops("switch to area"), (std::vector<PatchOp>{{OpKind::Set, "mark", Json("area")}}));
  EXPECT_EQ(ops("title it Monthly Revenue"), (std::vector<PatchOp>{{OpKind::Set, "title", Json("Monthly Revenue")}}));
  EXPECT_EQ(ops("sort by amount desc"), (std::vector<PatchOp>{{OpKind::Set, "encodings.x.sort", Json("desc")}}));
  EXPECT_EQ(ops("use average"), (std::vector<PatchOp>{{OpKind::Set, "encodings.y.aggregate", Json("avg")}}));
  EXPECT_EQ(ops("make it #00ff00"), (std::vector<PatchOp>{{OpKind::Set, "style.mark_color", Json("#00ff00")}}));
  EXPECT_TRUE(ops("translate it to French").empty());
}

TEST(ParseCustomization, UnparseableWithoutModel) {
  EXPECT_EQ(code_of([] { parse_customization("translate it to French", monthly_bar(), providers::Providers::offline()); }),
            ErrorCode::Unparseable);
}

TEST(ParseCustomization, ModelOpsFilteredToAllowlist) {
  using providers::ScriptedModelAdapter;
  providers::Providers p;
  const Json ops = Json::array({Json{{"op", "set"}, {"path", "source_sql"}, {"value", "DROP TABLE x"}},
                                Json{{"op", "set"}, {"path", "style.palette"}, {"value", "dark2"}},
                                Json{{"nonsense", true}}});
  p.model = std::make_shared<ScriptedModelAdapter>(std::vector<ScriptedModelAdapter::Step>{
      ScriptedModelAdapter::Step(std::in_place_index<0>, Json{{"ops", ops}})});
  const auto patch = parse_customization("give it a moodier look", monthly_bar(), p);
  ASSERT_EQ(patch.ops.size(), 1u);
  EXPECT_EQ(patch.ops[0].path, "style.palette");
}

TEST(PathAllowed, Allowlist) {
  for (const char* ok : {"mark", "title", "style.mark_color", "style.palette", "style.x_label", "style.y_label",
                         "encodings.x.sort", "encodings.y.aggregate", "encodings.color.field"}) {
    EXPECT_TRUE(path_allowed(ok)) << ok;
  }
  for (const char* bad : {"chart_id", "revision", "source_sql", "data", "encodings.z.field", "style", "encodings.x.bin"}) {
    EXPECT_FALSE(path_allowed(bad)) << bad;
  }
}

TEST(ValidatePatch, Examples) {
  const auto chart = monthly_bar();
  EXPECT_EQ(code_of([&] { validate_patch(chart, patch_of(chart, {{OpKind::Set, "mark", Json("heatmap")}})); }),
            ErrorCode::IncompatibleMark);
  EXPECT_NO_THROW(validate_patch(chart, patch_of(chart, {{OpKind::Set, "style.mark_color", Json("#00FF00")}})));
  EXPECT_EQ(code_of([&] { validate_patch(chart, patch_of(chart, {{OpKind::Set, "encodings.y.field", Json("ghost")}})); }),
            ErrorCode::BadValue);
  EXPECT_EQ(code_of([&] { validate_patch(chart, patch_of(chart, {{OpKind::Set, "style.mark_color", Json("blurple")}})); }),
            ErrorCode::BadValue);
  EXPECT_EQ(code_of([&] { validate_patch(chart, patch_of(chart, {{OpKind::Set, "mark", Json("donut")}})); }),
            ErrorCode::BadValue);
  EXPECT_EQ(code_of([&] { validate_patch(chart, patch_of(chart, {{OpKind::Set, "source_sql", Json("x")}})); }),
            ErrorCode::IllegalPath);
  EXPECT_EQ(code_of([&] { validate_patch(chart, patch_of(chart, {})); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { validate_patch(chart, ChartPatch{"c_other", {{OpKind::Set, "title", Json("t")}}}); }),
            ErrorCode::UnknownChart);
}

TEST(ApplyPatch, BlueIsMinimalChange) {
  const auto chart = monthly_bar();
  const auto patch = parse_customization("Change the color of this chart to blue", chart, providers::Providers::offline());
  const auto next = apply_patch(chart, patch);
  EXPECT_EQ(next.style.mark_color, "blue");
  EXPECT_EQ(next.revision, chart.revision + 1);
  EXPECT_EQ(next.chart_id, chart.chart_id);
  EXPECT_EQ(changed_paths(chart, next), (std::set<std::string>{"/style/mark_color", "/revision"}));
}

TEST(ApplyPatch, BarToLineKeepsEncodings) {
  const auto chart = monthly_bar();
  const auto next = apply_patch(chart, patch_of(chart, {{OpKind::Set, "mark", Json("line")}}));
  EXPECT_EQ(next.mark, ChartType::Line);
  EXPECT_EQ(next.encodings, chart.encodings);
  EXPECT_EQ(changed_paths(chart, next), (std::set<std::string>{"/mark", "/revision"}));
}

TEST(ApplyPatch, RemoveOp) {
  auto chart = monthly_bar();
  chart.style.mark_color = "red";
  const auto next = apply_patch(chart, patch_of(chart, {{OpKind::Remove, "style.mark_color", std::nullopt}}));
  EXPECT_FALSE(next.style.mark_color);
}

TEST(ValidatePatch, CompatibleMarkNeedsNoReassignment) {
  const auto chart = region_scatter();
  const auto validated = validate_patch(chart, patch_of(chart, {{OpKind::Set, "mark", Json("bar")}}));
  ASSERT_EQ(validated.patch.ops.size(), 1u);
  EXPECT_TRUE(validated.warnings.empty());
}

TEST(ValidatePatch, ReassignmentRecorded) {
  // Line over (day, price, units) draws x=day, y=price. A scatter keeps the
  // two channels but needs both quantitative.
  auto raw = testing::make_table({{"day", SemanticType::Temporal, {"2024-01-01", "2024-01-02", "2024-01-03", "2024-01-04"}},
                                  {"price", SemanticType::Quantitative, {1.0, 2.0, 3.0, 4.0}},
                                  {"units", SemanticType::Quantitative, {9.0, 7.0, 8.0, 5.0}}});
  const auto pre = viz::preprocess(raw);
  const auto line = viz::build_chart_spec(ChartType::Line, pre.profiles, pre.table, "");
  ASSERT_EQ(line.encoding(viz::Channel::X)->field, "day");
  const auto validated = validate_patch(line, patch_of(line, {{OpKind::Set, "mark", Json("scatter")}}));
  ASSERT_EQ(validated.patch.ops.size(), 3u);
  EXPECT_EQ(validated.patch.ops[0].path, "mark");
  EXPECT_EQ(validated.patch.ops[1], (PatchOp{OpKind::Set, "encodings.x.field", Json("price")}));
  EXPECT_EQ(validated.patch.ops[2], (PatchOp{OpKind::Set, "encodings.y.field", Json("units")}));
  const auto next = apply_patch(line, patch_of(line, {{OpKind::Set, "mark", Json("scatter")}}));
  EXPECT_TRUE(viz::self_check(next).empty());
  std::set<std::string> expected = {"/mark", "/revision", "/encodings/x/field", "/encodings/x/semantic_type",
                                    "/encodings/y/field"};
  for (const auto& path : changed_paths(line, next)) EXPECT_TRUE(expected.count(path)) << path;
}

TEST(ValidatePatch, PoorMarkWarning) {
  const auto chart = monthly_bar();
  // (T, Q) ranks area at 0.8.
  EXPECT_TRUE(validate_patch(chart, patch_of(chart, {{OpKind::Set, "mark", Json("area")}})).warnings.empty());
  // (Q, Q) has no bar rule at all.
  auto raw = testing::make_table({{"height", SemanticType::Quantitative, {1.0, 2.0, 3.0, 4.0}},
                                  {"weight", SemanticType::Quantitative, {2.0, 1.0, 4.0, 3.0}}});
  const auto pre = viz::preprocess(raw);
  const auto scatter = viz::build_chart_spec(ChartType::Scatter, pre.profiles, pre.table, "");
  const auto v = validate_patch(scatter, patch_of(scatter, {{OpKind::Set, "mark", Json("bar")}}));
  ASSERT_EQ(v.warnings.size(), 1u);
  EXPECT_NE(v.warnings[0].find("poor fit"), std::string::npos);
}

// Atomicity: a patch with a bad op anywhere leaves the input unchanged and
// no partial result escapes.
TEST(ApplyPatchProperty, AtomicMinimalAndRoundTrip) {
  std::mt19937_64 rng(21);
  const std::vector<PatchOp> good = {
      {OpKind::Set, "style.mark_color", Json("blue")}, {OpKind::Set, "title", Json("New")},
      {OpKind::Set, "style.palette", Json("dark2")},   {OpKind::Set, "encodings.x.sort", Json("desc")},
      {OpKind::Set, "style.y_label", Json("Amount")},  {OpKind::Set, "encodings.y.aggregate", Json("sum")}};
  const std::vector<PatchOp> bad = {{OpKind::Set, "style.mark_color", Json("nope")},
                                    {OpKind::Set, "data", Json::array()},
                                    {OpKind::Set, "encodings.y.field", Json("ghost")},
                                    {OpKind::Set, "mark", Json("heatmap")},
                                    {OpKind::Set, "title", Json(3)}};
  const std::map<std::string, std::string> pointer = {
      {"style.mark_color", "/style/mark_color"}, {"title", "/title"}, {"style.palette", "/style/palette"},
      {"encodings.x.sort", "/encodings/x/sort"}, {"style.y_label", "/style/y_label"},
      {"encodings.y.aggregate", "/encodings/y/aggregate"}};
  for (int trial = 0; trial < 300; ++trial) {
    const ChartSpec chart = monthly_bar();
    const std::string before = canonical(Json(chart));
    std::vector<PatchOp> ops;
    for (int i = 0; i < 1 + int(rng() % 3); ++i) ops.push_back(good[rng() % good.size()]);
    const bool poisoned = rng() % 2 == 0;
    if (poisoned) ops.insert(ops.begin() + long(rng() % (ops.size() + 1)), bad[rng() % bad.size()]);
    try {
      const auto next = apply_patch(chart, patch_of(chart, ops));
      EXPECT_FALSE(poisoned);
      std::set<std::string> allowed = {"/revision"};
      for (const auto& op : ops) allowed.insert(pointer.at(op.path));
      for (const auto& path : changed_paths(chart, next)) EXPECT_TRUE(allowed.count(path)) << path;
      EXPECT_EQ(Json::parse(canonical(Json(next))).get<ChartSpec>(), next);
    } catch (const Error&) {
      EXPECT_TRUE(poisoned);
    }
    EXPECT_EQ(canonical(Json(chart)), before);
  }
}

TEST(ChartPatchJson, RoundTrip) {
  const ChartPatch p{"c_1", {{OpKind::Set, "mark", Json("line")}, {OpKind::Remove, "style.mark_color", std::nullopt}}};
  const Json j = p;
  EXPECT_EQ(j.at("ops")[0].at("op"), "set");
  EXPECT_FALSE(j.at("ops")[1].contains("value"));
  EXPECT_EQ(j.get<ChartPatch>(), p);
}

}  // namespace
}  // namespace vizgen::customize
