#include "vizgen/viz/preprocess.hpp"

#include "vizgen/error.hpp"
#include "vizgen/time.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace vizgen::viz {
namespace {

using sql::SemanticType;

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return value_less(a, b); }
};

bool is_ordered(SemanticType t) {
  return t == SemanticType::Quantitative || t == SemanticType::Temporal;
}

// Temporal values compare by instant; unparseable ones sort last by text.
double order_key(const Value& v, SemanticType t) {
  if (t == SemanticType::Temporal) {
    if (const auto* s = std::get_if<std::string>(&v)) {
      if (auto days = parse_iso8601_days(*s)) return *days;
    }
  }
  return as_number(v).value_or(0.0);
}

bool promotable_to_temporal(const std::vector<Value>& values) {
  if (values.empty()) return false;
  std::size_t parsed = 0;
  for (const auto& v : values) {
    const auto* s = std::get_if<std::string>(&v);
    if (!s) return false;
    if (parse_iso8601_days(*s)) ++parsed;
  }
  return static_cast<double>(parsed) >= kTemporalParseRate * static_cast<double>(values.size());
}

void cap_categories(sql::ResultTable& table, std::size_t col) {
  std::map<Value, std::size_t, ValueLess> freq;
  for (const auto& row : table.rows) ++freq[row[col]];
  if (freq.size() <= kMaxCategories) return;
  std::vector<std::pair<Value, std::size_t>> ranked(freq.begin(), freq.end());
  // Most frequent first; ties keep value order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::set<Value, ValueLess> keep;
  for (std::size_t i = 0; i + 1 < kMaxCategories; ++i) keep.insert(ranked[i].first);
  for (auto& row : table.rows) {
    if (!keep.count(row[col])) row[col] = std::string(kOtherCategory);
  }
}

ColumnProfile profile_one(const sql::ResultTable& table, std::size_t col, double null_fraction) {
  ColumnProfile p;
  p.name = table.columns[col].name;
  p.semantic_type = table.columns[col].semantic_type;
  p.null_fraction = null_fraction;
  std::set<Value, ValueLess> distinct;
  std::vector<const Value*> present;
  for (const auto& row : table.rows) {
    if (is_null(row[col])) continue;
    distinct.insert(row[col]);
    present.push_back(&row[col]);
  }
  p.cardinality = distinct.size();
  if (is_ordered(p.semantic_type) && !present.empty()) {
    const auto key = [&](const Value* v) { return order_key(*v, p.semantic_type); };
    const auto [lo, hi] = std::minmax_element(
        present.begin(), present.end(), [&](const Value* a, const Value* b) { return key(a) < key(b); });
    p.min = **lo;
    p.max = **hi;
    bool up = true;
    bool down = true;
    for (std::size_t i = 1; i < present.size(); ++i) {
      const double a = key(present[i - 1]);
      const double b = key(present[i]);
      up = up && a <= b;
      down = down && a >= b;
    }
    p.monotonic = up || down;
  }
  return p;
}

}  // namespace

void to_json(Json& j, const ColumnProfile& p) {
  j = Json{{"name", p.name},
           {"semantic_type", sql::to_string(p.semantic_type)},
           {"cardinality", p.cardinality},
           {"null_fraction", p.null_fraction}};
  if (p.min) j["min"] = value_to_json(*p.min);
  if (p.max) j["max"] = value_to_json(*p.max);
  put_optional(j, "monotonic", p.monotonic);
}

std::vector<ColumnProfile> profile_columns(const sql::ResultTable& table) {
  std::vector<ColumnProfile> out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::size_t nulls = 0;
    for (const auto& row : table.rows) nulls += is_null(row[c]) ? 1 : 0;
    const double frac = table.rows.empty() ? 0.0
                                           : static_cast<double>(nulls) /
                                                 static_cast<double>(table.rows.size());
    out.push_back(profile_one(table, c, frac));
  }
  return out;
}

Preprocessed preprocess(const sql::ResultTable& table) {
  if (table.columns.empty()) throw Error(ErrorCode::InvalidArgument, "table has no columns");
  const auto original = profile_columns(table);

  Preprocessed out;
  out.table.columns = table.columns;
  out.table.truncated = table.truncated;
  out.table.source_sql = table.source_sql;
  for (const auto& row : table.rows) {
    if (std::any_of(row.begin(), row.end(), [](const Value& v) { return is_null(v); })) {
      ++out.dropped_rows;
    } else {
      out.table.rows.push_back(row);
    }
  }
  if (out.table.rows.empty()) {
    throw Error(ErrorCode::EmptyAfterCleaning,
                "all " + std::to_string(out.dropped_rows) + " rows contain nulls");
  }
  for (std::size_t c = 0; c < out.table.columns.size(); ++c) {
    auto& col = out.table.columns[c];
    if ((col.semantic_type == SemanticType::Unknown || col.semantic_type == SemanticType::Categorical) &&
        promotable_to_temporal(out.table.column_values(c))) {
      col.semantic_type = SemanticType::Temporal;
    }
    if (col.semantic_type == SemanticType::Categorical) cap_categories(out.table, c);
  }
  for (std::size_t c = 0; c < out.table.columns.size(); ++c) {
    out.profiles.push_back(profile_one(out.table, c, original[c].null_fraction));
  }
  return out;
}

}  // namespace vizgen::viz
