#include "vizgen/analysis/insights.hpp"

#include "vizgen/error.hpp"
#include "vizgen/intent/classifier.hpp"
#include "vizgen/time.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

namespace vizgen::analysis {
namespace {

using sql::SemanticType;

constexpr double kMadScale = 0.6745;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt_num(double v) { return fmt::format("{:.4g}", v); }

int kind_index(const Finding& f) { return static_cast<int>(f.index()); }

bool mentions(std::string_view text, std::string_view field) {
  return sql::to_lower(text).find(sql::to_lower(field)) != std::string::npos;
}

}  // namespace

void to_json(Json& j, const Finding& f) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrendFinding>) {
          j = Json{{"kind", "trend"},
                   {"field", x.field},
                   {"slope", x.slope},
                   {"intercept", x.intercept},
                   {"r2", x.r2},
                   {"direction", x.direction == Direction::Increasing ? "increasing" : "decreasing"}};
        } else if constexpr (std::is_same_v<T, AnomalyFinding>) {
          j = Json{{"kind", "anomaly"},
                   {"field", x.field},
                   {"row_index", x.row_index},
                   {"value", x.value},
                   {"score", x.score},
                   {"rule", x.rule == AnomalyRule::Mad ? "mad" : "mad_degenerate"}};
        } else {
          j = Json{{"kind", "correlation"},
                   {"field_a", x.field_a},
                   {"field_b", x.field_b},
                   {"r", x.r},
                   {"n", x.n}};
        }
      },
      f);
}

void from_json(const Json& j, Finding& f) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "trend") {
    f = TrendFinding{j.at("field").get<std::string>(), j.at("slope").get<double>(),
                     j.at("intercept").get<double>(), j.at("r2").get<double>(),
                     j.at("direction").get<std::string>() == "increasing" ? Direction::Increasing
                                                                          : Direction::Decreasing};
  } else if (kind == "anomaly") {
    f = AnomalyFinding{j.at("field").get<std::string>(), j.at("row_index").get<std::size_t>(),
                       j.at("value").get<double>(), j.at("score").get<double>(),
                       j.at("rule").get<std::string>() == "mad" ? AnomalyRule::Mad
                                                                : AnomalyRule::MadDegenerate};
  } else if (kind == "correlation") {
    f = CorrelationFinding{j.at("field_a").get<std::string>(), j.at("field_b").get<std::string>(),
                           j.at("r").get<double>(), j.at("n").get<std::size_t>()};
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown finding kind " + kind);
  }
}

void to_json(Json& j, const InsightReport& r) {
  Json findings = Json::array();
  for (const auto& f : r.findings) findings.push_back(f);
  j = Json{{"findings", std::move(findings)}, {"narrative", r.narrative}, {"source_sql", r.source_sql}};
}

void from_json(const Json& j, InsightReport& r) {
  r.findings.clear();
  for (const auto& f : j.at("findings")) r.findings.push_back(f.get<Finding>());
  r.narrative = j.at("narrative").get<std::string>();
  r.source_sql = j.value("source_sql", "");
}

std::vector<std::string> finding_fields(const Finding& f) {
  if (const auto* c = std::get_if<CorrelationFinding>(&f)) return {c->field_a, c->field_b};
  if (const auto* t = std::get_if<TrendFinding>(&f)) return {t->field};
  return {std::get<AnomalyFinding>(f).field};
}

std::string describe_finding(const Finding& f, bool temporal_x) {
  if (const auto* t = std::get_if<TrendFinding>(&f)) {
    return fmt::format("{} shows an {} trend (slope {} per {}, R²={:.3f}).", t->field,
                       t->direction == Direction::Increasing ? "increasing" : "decreasing",
                       t->slope >= 0 ? "+" + fmt_num(t->slope) : fmt_num(t->slope),
                       temporal_x ? "day" : "row", t->r2);
  }
  if (const auto* a = std::get_if<AnomalyFinding>(&f)) {
    if (a->rule == AnomalyRule::MadDegenerate) {
      return fmt::format("{} has an unusual value of {} at row {} (all other values sit on the median).",
                         a->field, fmt_num(a->value), a->row_index);
    }
    return fmt::format("{} has an unusual value of {} at row {} (modified z-score {:.2f}).", a->field,
                       fmt_num(a->value), a->row_index, a->score);
  }
  const auto& c = std::get<CorrelationFinding>(f);
  return fmt::format("{} and {} are strongly {} correlated (r={:.3f}, n={}).", c.field_a, c.field_b,
                     c.r >= 0 ? "positively" : "negatively", c.r, c.n);
}

std::optional<TrendFinding> detect_trend(std::span<const double> y, std::span<const double> x,
                                         const Thresholds& thresholds) {
  const std::size_t n = y.size();
  if (n < 3 || !all_finite(y)) return std::nullopt;
  std::vector<double> xs;
  if (x.empty()) {
    xs.resize(n);
    std::iota(xs.begin(), xs.end(), 0.0);
  } else {
    if (x.size() != n || !all_finite(x)) return std::nullopt;
    xs.assign(x.begin(), x.end());
  }
  const double mx = mean(xs);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0 || sxy == 0.0) return std::nullopt;
  TrendFinding t;
  t.slope = sxy / sxx;
  t.intercept = my - t.slope * mx;
  t.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  t.direction = t.slope > 0 ? Direction::Increasing : Direction::Decreasing;
  if (t.slope == 0.0 || t.r2 < thresholds.min_r2) return std::nullopt;
  return t;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of empty data");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<AnomalyFinding> detect_anomalies(std::span<const double> y, const Thresholds& thresholds) {
  std::vector<AnomalyFinding> out;
  if (y.size() < 4 || !all_finite(y)) return out;
  const double med = median({y.begin(), y.end()});
  std::vector<double> dev;
  dev.reserve(y.size());
  for (double v : y) dev.push_back(std::fabs(v - med));
  const double mad = median(dev);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (mad == 0.0) {
      if (y[i] != med) {
        out.push_back({{}, i, y[i], y[i] > med ? DBL_MAX : -DBL_MAX, AnomalyRule::MadDegenerate});
      }
      continue;
    }
    const double score = kMadScale * (y[i] - med) / mad;
    if (std::fabs(score) > thresholds.anomaly_score) {
      out.push_back({{}, i, y[i], score, AnomalyRule::Mad});
    }
  }
  return out;
}

std::vector<CorrelationFinding> detect_correlations(const sql::ResultTable& table,
                                                    const Thresholds& thresholds) {
  std::vector<std::size_t> quant;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c].semantic_type == SemanticType::Quantitative) quant.push_back(c);
  }
  std::sort(quant.begin(), quant.end(), [&](std::size_t a, std::size_t b) {
    return table.columns[a].name < table.columns[b].name;
  });
  std::vector<CorrelationFinding> out;
  for (std::size_t i = 0; i < quant.size(); ++i) {
    for (std::size_t k = i + 1; k < quant.size(); ++k) {
      const auto& name_a = table.columns[quant[i]].name;
      const auto& name_b = table.columns[quant[k]].name;
      if (name_a == name_b) continue;
      std::vector<double> xs, ys;
      for (const auto& row : table.rows) {
        const auto a = as_number(row[quant[i]]);
        const auto b = as_number(row[quant[k]]);
        if (a && b && std::isfinite(*a) && std::isfinite(*b)) {
          xs.push_back(*a);
          ys.push_back(*b);
        }
      }
      if (xs.size() < thresholds.min_pairs) continue;
      const double mx = mean(xs);
      const double my = mean(ys);
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (std::size_t r = 0; r < xs.size(); ++r) {
        sxx += (xs[r] - mx) * (xs[r] - mx);
        syy += (ys[r] - my) * (ys[r] - my);
        sxy += (xs[r] - mx) * (ys[r] - my);
      }
      if (sxx == 0.0 || syy == 0.0) continue;
      const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
      if (std::fabs(r) >= thresholds.min_abs_correlation) out.push_back({name_a, name_b, r, xs.size()});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.r) > std::fabs(b.r);
  });
  return out;
}

InsightReport generate_insights(const sql::ResultTable& table, std::string_view question,
                                const providers::Providers& providers, const Thresholds& thresholds,
                                providers::ModelUsage* usage) {
  std::vector<std::size_t> quant;
  std::optional<std::size_t> temporal;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c].semantic_type == SemanticType::Quantitative) quant.push_back(c);
    if (!temporal && table.columns[c].semantic_type == SemanticType::Temporal) temporal = c;
  }
  if (quant.empty()) throw Error(ErrorCode::NothingToAnalyze, "no quantitative column to analyze");

  // Row order for series: by the temporal column (unparseable last), else as given.
  std::vector<std::size_t> order(table.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::optional<double>> days(table.rows.size());
  if (temporal) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (const auto* s = std::get_if<std::string>(&table.rows[r][*temporal])) {
        days[r] = parse_iso8601_days(*s);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (days[a].has_value() != days[b].has_value()) return days[a].has_value();
      return days[a] && *days[a] < *days[b];
    });
  }

  std::vector<TrendFinding> trends;
  std::vector<AnomalyFinding> anomalies;
  for (std::size_t c : quant) {
    std::vector<double> ys, xs;
    std::vector<std::size_t> rows;
    for (std::size_t r : order) {
      const auto v = as_number(table.rows[r][c]);
      if (!v || !std::isfinite(*v)) continue;
      if (temporal && !days[r]) continue;
      ys.push_back(*v);
      xs.push_back(temporal ? *days[r] : static_cast<double>(r));
      rows.push_back(r);
    }
    if (temporal && !xs.empty()) {
      const double origin = xs.front();
      for (double& x : xs) x -= origin;
    }
    if (auto t = detect_trend(ys, xs, thresholds)) {
      t->field = table.columns[c].name;
      trends.push_back(std::move(*t));
    }
    for (auto& a : detect_anomalies(ys, thresholds)) {
      a.field = table.columns[c].name;
      a.row_index = rows[a.row_index];
      anomalies.push_back(std::move(a));
    }
  }
  std::stable_sort(anomalies.begin(), anomalies.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.score) > std::fabs(b.score);
  });

  InsightReport report;
  report.source_sql = table.source_sql;
  for (auto& t : trends) report.findings.emplace_back(std::move(t));
  for (auto& a : anomalies) report.findings.emplace_back(std::move(a));
  for (auto& c : detect_correlations(table, thresholds)) report.findings.emplace_back(std::move(c));

  // Kinds the question asks about lead the narrative.
  const auto tokens = intent::tokenize(question);
  auto asked = [&](std::initializer_list<std::string_view> words) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
      return std::find(words.begin(), words.end(), t) != words.end();
    });
  };
  const std::array<bool, 3> wanted = {
      asked({"trend", "trends", "growth", "grow", "increase", "decrease", "decline"}),
      asked({"anomaly", "anomalies", "spike", "spikes", "unusual", "outlier", "outliers"}),
      asked({"correlation", "correlated", "relationship", "related"})};
  std::vector<const Finding*> narrated;
  for (const auto& f : report.findings) narrated.push_back(&f);
  std::stable_sort(narrated.begin(), narrated.end(), [&](const Finding* a, const Finding* b) {
    return wanted[static_cast<std::size_t>(kind_index(*a))] && !wanted[static_cast<std::size_t>(kind_index(*b))];
  });

  if (narrated.empty()) {
    report.narrative = "No notable patterns were found in this result.";
  } else {
    for (const Finding* f : narrated) {
      report.narrative += (report.narrative.empty() ? "" : " ") + describe_finding(*f, temporal.has_value());
    }
  }

  if (!report.findings.empty() &&
      providers.model_for(providers::TaskTag::InsightNarrate)->enabled()) {
    const providers::StructuredPrompt prompt{
        providers::TaskTag::InsightNarrate,
        "Question: " + std::string(question) + "\nFindings:\n" + report.narrative +
            "\nRephrase the findings for a business reader. Mention every field.",
        {{"narrative", providers::FieldKind::String, true}}};
    try {
      const std::string text = providers::complete(providers, prompt, usage).value.at("narrative");
      const bool covers_all = std::all_of(report.findings.begin(), report.findings.end(), [&](const Finding& f) {
        const auto fields = finding_fields(f);
        return std::all_of(fields.begin(), fields.end(), [&](const auto& fld) { return mentions(text, fld); });
      });
      if (!text.empty() && covers_all) report.narrative = text;
    } catch (const Error&) {
      // Template narrative stands.
    }
  }
  return report;
}

}  // namespace vizgen::analysis
