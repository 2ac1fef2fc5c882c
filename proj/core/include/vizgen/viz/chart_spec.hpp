#pragma once

#include "vizgen/json_util.hpp"
#include "vizgen/sql/schema.hpp"
#include "vizgen/value.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::viz {

// Declaration order is the ranking tie-break.
enum class ChartType { Bar, Line, Area, Scatter, Histogram, Heatmap, Pie };

inline constexpr std::array<ChartType, 7> kAllChartTypes = {
    ChartType::Bar,       ChartType::Line,    ChartType::Area, ChartType::Scatter,
    ChartType::Histogram, ChartType::Heatmap, ChartType::Pie};

std::string_view to_string(ChartType t);
std::optional<ChartType> chart_type_from_string(std::string_view name);

enum class Channel { X, Y, Color, Size, RowFacet };

std::string_view to_string(Channel c);
std::optional<Channel> channel_from_string(std::string_view name);

enum class Aggregate { None, Sum, Avg, Count, Min, Max };

std::string_view to_string(Aggregate a);
std::optional<Aggregate> aggregate_from_string(std::string_view name);

enum class SortOrder { Asc, Desc };

std::string_view to_string(SortOrder s);
std::optional<SortOrder> sort_order_from_string(std::string_view name);

struct Encoding {
  std::string field;
  sql::SemanticType semantic_type = sql::SemanticType::Unknown;
  Aggregate aggregate = Aggregate::None;
  std::optional<int> bin;
  std::optional<SortOrder> sort;

  bool operator==(const Encoding&) const = default;
};

inline constexpr char kDefaultPalette[] = "category10";

struct Style {
  std::string palette = kDefaultPalette;
  std::optional<std::string> mark_color;
  std::string x_label;
  std::string y_label;

  bool operator==(const Style&) const = default;
};

struct DataColumn {
  std::string name;
  sql::SemanticType semantic_type = sql::SemanticType::Unknown;
  std::vector<Value> values;

  bool operator==(const DataColumn&) const = default;
};

// Inline, column-major.
struct DataBlock {
  std::vector<DataColumn> columns;

  static DataBlock from_table(const sql::ResultTable& table);
  const DataColumn* find(std::string_view name) const;
  std::size_t row_count() const;
  bool operator==(const DataBlock&) const = default;
};

struct ChartSpec {
  std::string chart_id;
  ChartType mark = ChartType::Bar;
  std::map<Channel, Encoding> encodings;
  std::string title;
  Style style;
  DataBlock data;
  std::string source_sql;
  std::int64_t revision = 1;

  const Encoding* encoding(Channel c) const;
  bool operator==(const ChartSpec&) const = default;
};

void to_json(Json& j, const Encoding& e);
void from_json(const Json& j, Encoding& e);
void to_json(Json& j, const Style& s);
void from_json(const Json& j, Style& s);
void to_json(Json& j, const DataBlock& d);
void from_json(const Json& j, DataBlock& d);
void to_json(Json& j, const ChartSpec& c);
void from_json(const Json& j, ChartSpec& c);

// CSS named color (case-insensitive) or #RRGGBB.
bool is_valid_color(std::string_view token);
const std::vector<std::string_view>& css_color_names();

// Channels a mark needs and the ones it may carry.
struct ChannelRequirements {
  std::vector<Channel> required;
  std::vector<Channel> allowed;
};
ChannelRequirements channel_requirements(ChartType mark);

// Empty when the spec satisfies every ChartSpec invariant; otherwise one
// message per violation.
std::vector<std::string> self_check(const ChartSpec& spec);

// chart_id derivation: "c_" + short digest of (sql, mark, encodings).
std::string derive_chart_id(const ChartSpec& spec);

// RFC 4180 rendering of the data block, header row first.
std::string to_csv(const DataBlock& data);

}  // namespace vizgen::viz
