#include "vizgen/viz/builder.hpp"

#include "vizgen/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <regex>
#include <set>

namespace vizgen::viz {
namespace {

using sql::SemanticType;

bool is_categorical(SemanticType t) {
  return t == SemanticType::Categorical || t == SemanticType::Boolean;
}

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return value_less(a, b); }
};

// True when some combination of the key columns repeats.
bool has_duplicate_keys(const sql::ResultTable& table, const std::vector<std::string>& keys) {
  std::vector<std::size_t> idx;
  for (const auto& k : keys) {
    if (auto i = table.column_index(k)) idx.push_back(*i);
  }
  std::set<std::vector<Value>, std::function<bool(const std::vector<Value>&, const std::vector<Value>&)>>
      seen([](const std::vector<Value>& a, const std::vector<Value>& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
      });
  for (const auto& row : table.rows) {
    std::vector<Value> key;
    for (auto i : idx) key.push_back(row[i]);
    if (!seen.insert(std::move(key)).second) return true;
  }
  return false;
}

Encoding encode(const ColumnProfile& p) { return Encoding{p.name, p.semantic_type, Aggregate::None, {}, {}}; }

[[noreturn]] void unsatisfiable(ChartType t, const std::string& why) {
  throw Error(ErrorCode::ChannelUnsatisfiable, std::string(to_string(t)) + " needs " + why,
              std::string(to_string(t)));
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty data");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

int freedman_diaconis_bins(std::span<const double> values) {
  if (values.size() < 2) return kMinBins;
  std::vector<double> v(values.begin(), values.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  if (iqr <= 0.0 || range <= 0.0) return kMinBins;
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
  const double bins = std::ceil(range / width);
  return static_cast<int>(std::clamp(bins, static_cast<double>(kMinBins), static_cast<double>(kMaxBins)));
}

std::string humanize_field(std::string_view field) {
  static const std::regex call(R"(^\s*([A-Za-z_]+)\s*\(\s*(DISTINCT\s+)?(.*?)\s*\)\s*$)", std::regex::icase);
  std::string f(field);
  std::smatch m;
  if (std::regex_match(f, m, call)) {
    const std::string fn = sql::to_lower(m[1].str());
    const std::string arg = humanize_field(m[3].str());
    std::string name = fn == "avg" ? "average" : fn == "min" ? "minimum" : fn == "max" ? "maximum" : fn;
    if (fn == "count" && (arg == "*" || arg.empty())) return "count";
    return name + " of " + (m[2].matched ? "distinct " : "") + arg;
  }
  for (char& c : f) {
    if (c == '_') c = ' ';
  }
  return f;
}

std::string title_case(std::string_view text) {
  std::string out(text);
  bool start = true;
  for (char& c : out) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (start) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      start = false;
    } else {
      start = c == ' ' || c == '_' || c == '-' || c == '(' || c == '/';
    }
  }
  return out;
}

ChartSpec build_chart_spec(ChartType chart_type, const std::vector<ColumnProfile>& profiles,
                           const sql::ResultTable& table, std::string_view /*question*/) {
  std::vector<const ColumnProfile*> temporal, categorical, quantitative;
  for (const auto& p : profiles) {
    if (!table.column_index(p.name)) continue;
    if (p.semantic_type == SemanticType::Temporal) temporal.push_back(&p);
    if (is_categorical(p.semantic_type)) categorical.push_back(&p);
    if (p.semantic_type == SemanticType::Quantitative) quantitative.push_back(&p);
  }

  ChartSpec spec;
  spec.mark = chart_type;
  spec.source_sql = table.source_sql;
  spec.data = DataBlock::from_table(table);
  std::string y_title;

  switch (chart_type) {
    case ChartType::Histogram: {
      if (quantitative.empty()) unsatisfiable(chart_type, "a quantitative field");
      Encoding x = encode(*quantitative.front());
      std::vector<double> values;
      for (const auto& v : table.column_values(*table.column_index(x.field))) {
        if (auto d = as_number(v)) values.push_back(*d);
      }
      x.bin = freedman_diaconis_bins(values);
      spec.encodings[Channel::X] = x;
      break;
    }
    case ChartType::Scatter: {
      if (quantitative.size() < 2) unsatisfiable(chart_type, "two quantitative fields");
      spec.encodings[Channel::X] = encode(*quantitative[0]);
      spec.encodings[Channel::Y] = encode(*quantitative[1]);
      if (!categorical.empty()) spec.encodings[Channel::Color] = encode(*categorical.front());
      break;
    }
    case ChartType::Heatmap: {
      std::vector<const ColumnProfile*> dims = temporal;
      dims.insert(dims.end(), categorical.begin(), categorical.end());
      if (dims.size() < 2 || quantitative.empty()) {
        unsatisfiable(chart_type, "two categorical or temporal fields and a quantitative field");
      }
      spec.encodings[Channel::X] = encode(*dims[0]);
      spec.encodings[Channel::Y] = encode(*dims[1]);
      Encoding color = encode(*quantitative.front());
      if (has_duplicate_keys(table, {dims[0]->name, dims[1]->name})) color.aggregate = Aggregate::Sum;
      spec.encodings[Channel::Color] = color;
      break;
    }
    case ChartType::Pie:
    case ChartType::Bar:
    case ChartType::Line:
    case ChartType::Area: {
      const ColumnProfile* x = !temporal.empty()      ? temporal.front()
                               : !categorical.empty() ? categorical.front()
                               : !quantitative.empty() ? quantitative.front()
                                                       : nullptr;
      if (chart_type == ChartType::Pie) x = categorical.empty() ? nullptr : categorical.front();
      const ColumnProfile* y = nullptr;
      for (const auto* q : quantitative) {
        if (q != x) {
          y = q;
          break;
        }
      }
      if (!x || !y) unsatisfiable(chart_type, "an x field and a quantitative y field");
      spec.encodings[Channel::X] = encode(*x);
      std::vector<std::string> keys = {x->name};
      const bool multi_series = (chart_type == ChartType::Line || chart_type == ChartType::Area) &&
                                x->semantic_type == SemanticType::Temporal && !categorical.empty();
      if (multi_series) {
        spec.encodings[Channel::Color] = encode(*categorical.front());
        keys.push_back(categorical.front()->name);
      }
      Encoding ye = encode(*y);
      if (x->semantic_type != SemanticType::Quantitative && has_duplicate_keys(table, keys)) {
        ye.aggregate = Aggregate::Sum;
      }
      spec.encodings[Channel::Y] = ye;
      break;
    }
  }

  const Encoding& x = spec.encodings.at(Channel::X);
  spec.style.x_label = humanize_field(x.field);
  if (chart_type == ChartType::Histogram) {
    spec.style.y_label = "count";
    spec.title = title_case("distribution of " + humanize_field(x.field));
  } else if (chart_type == ChartType::Heatmap) {
    const Encoding& y = spec.encodings.at(Channel::Y);
    const Encoding& color = spec.encodings.at(Channel::Color);
    spec.style.y_label = humanize_field(y.field);
    spec.title = title_case(humanize_field(color.field) + " by " + humanize_field(x.field) + " and " +
                            humanize_field(y.field));
  } else {
    const Encoding& y = spec.encodings.at(Channel::Y);
    y_title = humanize_field(y.field);
    spec.style.y_label = y_title;
    spec.title = title_case(y_title + " by " + humanize_field(x.field));
  }
  spec.chart_id = derive_chart_id(spec);
  return spec;
}

}  // namespace vizgen::viz
