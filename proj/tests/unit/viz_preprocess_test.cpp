#include "test_support.hpp"
#include "vizgen/error.hpp"
#include "vizgen/viz/preprocess.hpp"

#include <gtest/gtest.h>

#include <fmt/format.h>

#include <map>
#include <random>

namespace vizgen::viz {
namespace {

using sql::SemanticType;
using testing::make_table;

TEST(Preprocess, DropsRowsWithNulls) {
  std::vector<Value> region;
  std::vector<Value> amount;
  for (int i = 0; i < 100; ++i) {
    region.emplace_back(i % 2 == 0 ? "east" : "west");
    amount.emplace_back(i % 33 == 5 ? Value{} : Value{std::int64_t{i}});
  }
  // i = 5, 38, 71 are null
  const auto out = preprocess(make_table({{"region", SemanticType::Categorical, region},
                                          {"amount", SemanticType::Quantitative, amount}}));
  EXPECT_EQ(out.table.rows.size(), 97u);
  EXPECT_EQ(out.dropped_rows, 3u);
  EXPECT_DOUBLE_EQ(out.profiles[1].null_fraction, 0.03);
  EXPECT_DOUBLE_EQ(out.profiles[0].null_fraction, 0.0);
}

TEST(Preprocess, PromotesIsoStringsToTemporal) {
  std::vector<Value> month;
  std::vector<Value> total;
  for (int m = 1; m <= 12; ++m) {
    month.emplace_back(fmt::format("2024-{:02}-01", m));
    total.emplace_back(double(m) * 10);
  }
  const auto out = preprocess(make_table({{"month", SemanticType::Unknown, month},
                                          {"total", SemanticType::Quantitative, total}}));
  EXPECT_EQ(out.profiles[0].semantic_type, SemanticType::Temporal);
  EXPECT_EQ(out.profiles[0].cardinality, 12u);
  EXPECT_EQ(out.profiles[0].min, Value{std::string("2024-01-01")});
  EXPECT_EQ(out.profiles[0].max, Value{std::string("2024-12-01")});
  EXPECT_EQ(out.profiles[0].monotonic, true);
}

TEST(Preprocess, ParseRateThreshold) {
  // 19 of 20 parse (95%) promotes; 18 of 20 does not.
  auto column = [](int bad) {
    std::vector<Value> v;
    for (int i = 0; i < 20; ++i) {
      v.emplace_back(i < bad ? std::string("n/a") : fmt::format("2024-01-{:02}", i + 1));
    }
    return v;
  };
  EXPECT_EQ(preprocess(make_table({{"d", SemanticType::Unknown, column(1)}})).profiles[0].semantic_type,
            SemanticType::Temporal);
  EXPECT_EQ(preprocess(make_table({{"d", SemanticType::Unknown, column(2)}})).profiles[0].semantic_type,
            SemanticType::Unknown);
}

TEST(Preprocess, AllNullIsEmptyAfterCleaning) {
  try {
    preprocess(make_table({{"x", SemanticType::Quantitative, {Value{}, Value{}}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyAfterCleaning);
  }
  EXPECT_THROW(preprocess(sql::ResultTable{}), Error);
}

TEST(Preprocess, FoldsCategoricalTail) {
  // Category k appears 30 - k times for k in 0..29; the top 19 are 0..18.
  std::vector<Value> cat;
  for (int k = 0; k < 30; ++k) {
    for (int n = 0; n < 30 - k; ++n) cat.emplace_back(fmt::format("c{:02}", k));
  }
  const auto out = preprocess(make_table({{"cat", SemanticType::Categorical, cat}}));
  EXPECT_EQ(out.profiles[0].cardinality, 20u);
  std::map<std::string, int> counts;
  for (const auto& row : out.table.rows) ++counts[std::get<std::string>(row[0])];
  EXPECT_EQ(counts.count("c18"), 1u);
  EXPECT_EQ(counts.count("c19"), 0u);
  // Tail sizes 11 + 10 + ... + 1.
  EXPECT_EQ(counts[kOtherCategory], 66);
}

TEST(Preprocess, ProfileInvariantsAndIdempotence) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(0, 40);
  std::bernoulli_distribution null_coin(0.1);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + small(rng) * 3;
    std::vector<Value> c, q, d;
    for (int i = 0; i < rows; ++i) {
      c.emplace_back(null_coin(rng) ? Value{} : Value{fmt::format("k{}", small(rng))});
      q.emplace_back(null_coin(rng) ? Value{} : Value{double(small(rng)) / 4});
      d.emplace_back(fmt::format("2023-{:02}-{:02}", 1 + small(rng) % 12, 1 + small(rng) % 28));
    }
    const auto table = make_table({{"c", SemanticType::Categorical, c},
                                   {"q", SemanticType::Quantitative, q},
                                   {"d", SemanticType::Unknown, d}});
    Preprocessed once;
    try {
      once = preprocess(table);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptyAfterCleaning);
      continue;
    }
    EXPECT_EQ(once.table.rows.size() + once.dropped_rows, table.rows.size());
    for (const auto& p : once.profiles) {
      EXPECT_LE(p.cardinality, once.table.rows.size());
      EXPECT_GE(p.null_fraction, 0.0);
      EXPECT_LE(p.null_fraction, 1.0);
    }
    const auto twice = preprocess(once.table);
    EXPECT_EQ(twice.table, once.table);
    EXPECT_EQ(twice.dropped_rows, 0u);
    ASSERT_EQ(twice.profiles.size(), once.profiles.size());
    for (std::size_t i = 0; i < once.profiles.size(); ++i) {
      auto a = once.profiles[i];
      auto b = twice.profiles[i];
      a.null_fraction = b.null_fraction = 0.0;
      EXPECT_EQ(a, b);
    }
  }
}

}  // namespace
}  // namespace vizgen::viz
