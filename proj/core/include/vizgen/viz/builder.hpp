#pragma once

#include "vizgen/viz/chart_spec.hpp"
#include "vizgen/viz/preprocess.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::viz {

inline constexpr int kMinBins = 5;
inline constexpr int kMaxBins = 50;

// Type-7 (linear interpolation) sample quantile of unsorted data, p in [0, 1].
double quantile(std::vector<double> values, double p);

// Freedman-Diaconis bin count clamped to [kMinBins, kMaxBins]; kMinBins when
// the interquartile range or the range is zero.
int freedman_diaconis_bins(std::span<const double> values);

// "SUM(amount)" -> "sum of amount", "order_date" -> "order date".
std::string humanize_field(std::string_view field);

// Capitalizes the first letter of every word.
std::string title_case(std::string_view text);

// Assigns channels per mark, derives title, labels and chart_id, and embeds
// the table as the data block. `table` is the preprocessed table. Throws
// ChannelUnsatisfiable.
ChartSpec build_chart_spec(ChartType chart_type, const std::vector<ColumnProfile>& profiles,
                           const sql::ResultTable& table, std::string_view question);

}  // namespace vizgen::viz
