#pragma once

#include "vizgen/json_util.hpp"
#include "vizgen/sql/schema.hpp"
#include "vizgen/value.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vizgen::viz {

inline constexpr std::size_t kMaxCategories = 20;
inline constexpr char kOtherCategory[] = "Other";
inline constexpr double kTemporalParseRate = 0.95;

struct ColumnProfile {
  std::string name;
  sql::SemanticType semantic_type = sql::SemanticType::Unknown;
  std::size_t cardinality = 0;
  double null_fraction = 0.0;  // of the table before cleaning
  std::optional<Value> min;    // quantitative and temporal only
  std::optional<Value> max;
  std::optional<bool> monotonic;

  bool operator==(const ColumnProfile&) const = default;
};

void to_json(Json& j, const ColumnProfile& p);

struct Preprocessed {
  sql::ResultTable table;
  std::vector<ColumnProfile> profiles;
  std::size_t dropped_rows = 0;
};

// Drops rows with any null, promotes ISO-8601 text columns to temporal,
// folds categorical tails into "Other" and profiles the result. Throws
// InvalidArgument (no columns), EmptyAfterCleaning.
Preprocessed preprocess(const sql::ResultTable& table);

// Profiles without cleaning; null_fraction is measured on `table` itself.
std::vector<ColumnProfile> profile_columns(const sql::ResultTable& table);

}  // namespace vizgen::viz
