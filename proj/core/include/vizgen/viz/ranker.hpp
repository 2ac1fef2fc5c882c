#pragma once

#include "vizgen/viz/chart_spec.hpp"
#include "vizgen/viz/preprocess.hpp"

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::viz {

inline constexpr char kUserRequestedReason[] = "user-requested";

struct RankedChart {
  ChartType chart_type = ChartType::Bar;
  double score = 0.0;
  std::string reason;

  bool operator==(const RankedChart&) const = default;
};

// Descending by score, ties in ChartType declaration order.
struct RankedChartTypes {
  std::vector<RankedChart> entries;

  const RankedChart* find(ChartType t) const;
  bool operator==(const RankedChartTypes&) const = default;
};

void to_json(Json& j, const RankedChartTypes& r);

// One field slot of a rule. Boolean fields count as categorical; unknown
// fields never match.
struct FieldPattern {
  enum class Kind { Temporal, Categorical, Quantitative, Dimension };  // Dimension = T or C
  Kind kind = Kind::Quantitative;
  std::size_t min_cardinality = 0;  // categorical only, inclusive
  std::size_t max_cardinality = std::numeric_limits<std::size_t>::max();

  bool matches(const ColumnProfile& p) const;
  std::string to_text() const;
  bool operator==(const FieldPattern&) const = default;
};

// A rule applies to a field multiset that matches its patterns one-to-one.
struct ChartRule {
  std::vector<FieldPattern> fields;
  ChartType chart_type = ChartType::Bar;
  double score = 0.0;

  bool operator==(const ChartRule&) const = default;
};

// The scoring matrix. Text form, one rule per line, tab separated:
//   <patterns>\t<chart type>\t<score>
// where patterns are space separated T, Q, C, C:<lo>-<hi> or X (T or C).
class RuleTable {
 public:
  static const RuleTable& defaults();
  // Throws InvalidArgument naming the offending line.
  static RuleTable parse(std::string_view text);
  static RuleTable load(const std::filesystem::path& file);

  const std::vector<ChartRule>& rules() const { return rules_; }
  std::string to_text() const;
  bool operator==(const RuleTable&) const = default;

 private:
  std::vector<ChartRule> rules_;
};

// Rules matching the whole field set win outright; otherwise every subset
// is scored and each chart type keeps its best score. Throws NotPlottable.
RankedChartTypes rank_charts(const std::vector<ColumnProfile>& profiles,
                             std::optional<ChartType> explicit_request = std::nullopt,
                             const RuleTable& rules = RuleTable::defaults());

// Whether the fields can fill `chart_type`'s required channels.
bool request_satisfiable(ChartType chart_type, const std::vector<ColumnProfile>& profiles);

// First chart-type word in the text ("bar", "line", "area", "scatter",
// "histogram", "heatmap" or "heat map", "pie").
std::optional<ChartType> requested_chart_type(std::string_view text);

}  // namespace vizgen::viz
