#pragma once

#include "vizgen/json_util.hpp"
#include "vizgen/providers/providers.hpp"
#include "vizgen/sql/schema.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vizgen::analysis {

struct Thresholds {
  double min_r2 = 0.5;
  double anomaly_score = 3.5;
  double min_abs_correlation = 0.7;
  std::size_t min_pairs = 3;
};

enum class Direction { Increasing, Decreasing };
enum class AnomalyRule { Mad, MadDegenerate };

struct TrendFinding {
  std::string field;
  double slope = 0.0;  // per x unit: row index, or day for temporal x
  double intercept = 0.0;
  double r2 = 0.0;
  Direction direction = Direction::Increasing;

  bool operator==(const TrendFinding&) const = default;
};

struct AnomalyFinding {
  std::string field;
  std::size_t row_index = 0;
  double value = 0.0;
  double score = 0.0;  // +-DBL_MAX under MadDegenerate
  AnomalyRule rule = AnomalyRule::Mad;

  bool operator==(const AnomalyFinding&) const = default;
};

struct CorrelationFinding {
  std::string field_a;  // field_a < field_b
  std::string field_b;
  double r = 0.0;
  std::size_t n = 0;

  bool operator==(const CorrelationFinding&) const = default;
};

using Finding = std::variant<TrendFinding, AnomalyFinding, CorrelationFinding>;

// Trends, then anomalies by |score| desc, then correlations by |r| desc.
struct InsightReport {
  std::vector<Finding> findings;
  std::string narrative;  // one sentence per finding
  std::string source_sql;

  bool operator==(const InsightReport&) const = default;
};

void to_json(Json& j, const Finding& f);
void from_json(const Json& j, Finding& f);
void to_json(Json& j, const InsightReport& r);
void from_json(const Json& j, InsightReport& r);

// Fields a finding is about, in display order.
std::vector<std::string> finding_fields(const Finding& f);
// The template sentence for one finding.
std::string describe_finding(const Finding& f, bool temporal_x = false);

// OLS of y on x (x defaults to 0..n-1). Absent when n < 3, any value is
// non-finite, x is constant, the slope is zero or r2 < min_r2.
std::optional<TrendFinding> detect_trend(std::span<const double> y, std::span<const double> x = {},
                                         const Thresholds& thresholds = {});

// Modified z-score 0.6745 (y - median) / MAD. When MAD is zero every point
// off the median is flagged as MadDegenerate. Empty when n < 4.
std::vector<AnomalyFinding> detect_anomalies(std::span<const double> y,
                                             const Thresholds& thresholds = {});

double median(std::vector<double> values);

// Pearson r over pairwise-complete rows of every quantitative column pair.
std::vector<CorrelationFinding> detect_correlations(const sql::ResultTable& table,
                                                    const Thresholds& thresholds = {});

// Runs every detector. Series are ordered by the first temporal column when
// there is one. The model may rephrase the narrative only if the rephrasing
// names every finding's field. Throws NothingToAnalyze.
InsightReport generate_insights(const sql::ResultTable& table, std::string_view question,
                                const providers::Providers& providers,
                                const Thresholds& thresholds = {},
                                providers::ModelUsage* usage = nullptr);

}  // namespace vizgen::analysis
