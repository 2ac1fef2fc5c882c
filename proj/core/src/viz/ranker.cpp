#include "vizgen/viz/ranker.hpp"

#include "vizgen/error.hpp"
#include "vizgen/intent/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vizgen::viz {
namespace {

using sql::SemanticType;

constexpr char kDefaultRules[] =
    "# fields\tchart\tscore\n"
    "T Q\tline\t1.0\n"
    "T Q\tarea\t0.8\n"
    "T Q\tbar\t0.6\n"
    "C:0-20 Q\tbar\t1.0\n"
    "C:0-6 Q\tpie\t0.5\n"
    "C:21-50 Q\tbar\t0.6\n"
    "Q Q\tscatter\t1.0\n"
    "Q\thistogram\t1.0\n"
    "X X Q\theatmap\t1.0\n";

bool is_dimension(SemanticType t) {
  return t == SemanticType::Temporal || t == SemanticType::Categorical ||
         t == SemanticType::Boolean;
}

bool usable(const ColumnProfile& p) {
  return is_dimension(p.semantic_type) || p.semantic_type == SemanticType::Quantitative;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

FieldPattern parse_pattern(const std::string& token) {
  FieldPattern p;
  if (token == "T") {
    p.kind = FieldPattern::Kind::Temporal;
  } else if (token == "Q") {
    p.kind = FieldPattern::Kind::Quantitative;
  } else if (token == "X") {
    p.kind = FieldPattern::Kind::Dimension;
  } else if (token == "C") {
    p.kind = FieldPattern::Kind::Categorical;
  } else if (token.rfind("C:", 0) == 0) {
    p.kind = FieldPattern::Kind::Categorical;
    const auto dash = token.find('-', 2);
    if (dash == std::string::npos) throw Error(ErrorCode::InvalidArgument, "bad range " + token);
    p.min_cardinality = std::stoul(token.substr(2, dash - 2));
    p.max_cardinality = std::stoul(token.substr(dash + 1));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown field pattern " + token);
  }
  return p;
}

// Whether `fields` can be matched one-to-one onto `rule.fields`.
bool rule_matches(const ChartRule& rule, const std::vector<const ColumnProfile*>& fields) {
  if (rule.fields.size() != fields.size()) return false;
  std::vector<std::size_t> order(fields.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < order.size() && ok; ++i) {
      ok = rule.fields[i].matches(*fields[order[i]]);
    }
    if (ok) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

std::string describe(const ChartRule& rule, const std::vector<const ColumnProfile*>& fields) {
  std::string out;
  for (const auto& f : rule.fields) out += (out.empty() ? "" : " + ") + f.to_text();
  out += " rule on ";
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? ", " : "") + fields[i]->name;
  return out;
}

using Best = std::map<ChartType, RankedChart>;

void score_subset(const RuleTable& rules, const std::vector<const ColumnProfile*>& subset, Best& best) {
  for (const auto& rule : rules.rules()) {
    if (!rule_matches(rule, subset)) continue;
    auto it = best.find(rule.chart_type);
    // Subsets are visited in a canonical order, so the first of equal scores
    // is stable under input permutation.
    if (it == best.end() || rule.score > it->second.score) {
      best[rule.chart_type] = {rule.chart_type, rule.score, describe(rule, subset)};
    }
  }
}

void for_each_subset(const std::vector<const ColumnProfile*>& fields, std::size_t size,
                     const std::function<void(const std::vector<const ColumnProfile*>&)>& fn) {
  std::vector<const ColumnProfile*> current;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (current.size() == size) {
      fn(current);
      return;
    }
    for (std::size_t i = start; i < fields.size(); ++i) {
      current.push_back(fields[i]);
      rec(i + 1);
      current.pop_back();
    }
  };
  rec(0);
}

}  // namespace

const RankedChart* RankedChartTypes::find(ChartType t) const {
  for (const auto& e : entries) {
    if (e.chart_type == t) return &e;
  }
  return nullptr;
}

void to_json(Json& j, const RankedChartTypes& r) {
  j = Json::array();
  for (const auto& e : r.entries) {
    j.push_back({{"chart_type", to_string(e.chart_type)}, {"score", e.score}, {"reason", e.reason}});
  }
}

bool FieldPattern::matches(const ColumnProfile& p) const {
  const bool categorical = p.semantic_type == SemanticType::Categorical ||
                           p.semantic_type == SemanticType::Boolean;
  switch (kind) {
    case Kind::Temporal: return p.semantic_type == SemanticType::Temporal;
    case Kind::Quantitative: return p.semantic_type == SemanticType::Quantitative;
    case Kind::Dimension: return categorical || p.semantic_type == SemanticType::Temporal;
    case Kind::Categorical:
      return categorical && p.cardinality >= min_cardinality && p.cardinality <= max_cardinality;
  }
  return false;
}

std::string FieldPattern::to_text() const {
  switch (kind) {
    case Kind::Temporal: return "T";
    case Kind::Quantitative: return "Q";
    case Kind::Dimension: return "X";
    case Kind::Categorical:
      if (min_cardinality == 0 && max_cardinality == std::numeric_limits<std::size_t>::max()) return "C";
      return "C:" + std::to_string(min_cardinality) + "-" + std::to_string(max_cardinality);
  }
  return "?";
}

const RuleTable& RuleTable::defaults() {
  static const RuleTable table = parse(kDefaultRules);
  return table;
}

RuleTable RuleTable::parse(std::string_view text) {
  RuleTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream row(t);
    std::string cell;
    while (std::getline(row, cell, '\t')) cells.push_back(trim(cell));
    const auto where = " (rule line " + std::to_string(number) + ")";
    if (cells.size() != 3) throw Error(ErrorCode::InvalidArgument, "expected 3 columns" + where);
    ChartRule rule;
    std::istringstream pats(cells[0]);
    std::string tok;
    while (pats >> tok) rule.fields.push_back(parse_pattern(tok));
    if (rule.fields.empty()) throw Error(ErrorCode::InvalidArgument, "no field patterns" + where);
    const auto chart = chart_type_from_string(cells[1]);
    if (!chart) throw Error(ErrorCode::InvalidArgument, "unknown chart type" + where);
    rule.chart_type = *chart;
    try {
      rule.score = std::stod(cells[2]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad score" + where);
    }
    if (rule.score < 0.0 || rule.score > 1.0) throw Error(ErrorCode::InvalidArgument, "score out of [0,1]" + where);
    table.rules_.push_back(std::move(rule));
  }
  return table;
}

RuleTable RuleTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read chart rules " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string RuleTable::to_text() const {
  std::string out = "# fields\tchart\tscore\n";
  for (const auto& r : rules_) {
    std::string pats;
    for (const auto& f : r.fields) pats += (pats.empty() ? "" : " ") + f.to_text();
    std::ostringstream score;
    score << r.score;
    out += pats + "\t" + std::string(to_string(r.chart_type)) + "\t" + score.str() + "\n";
  }
  return out;
}

RankedChartTypes rank_charts(const std::vector<ColumnProfile>& profiles,
                             std::optional<ChartType> explicit_request, const RuleTable& rules) {
  if (profiles.empty()) throw Error(ErrorCode::InvalidArgument, "no column profiles");
  std::vector<const ColumnProfile*> fields;
  for (const auto& p : profiles) {
    if (usable(p)) fields.push_back(&p);
  }
  std::stable_sort(fields.begin(), fields.end(), [](const ColumnProfile* a, const ColumnProfile* b) {
    if (a->name != b->name) return a->name < b->name;
    if (a->semantic_type != b->semantic_type) return a->semantic_type < b->semantic_type;
    return a->cardinality < b->cardinality;
  });

  Best best;
  score_subset(rules, fields, best);
  if (best.empty()) {
    std::size_t widest = 0;
    for (const auto& r : rules.rules()) widest = std::max(widest, r.fields.size());
    for (std::size_t size = 1; size <= std::min(widest, fields.size()); ++size) {
      if (size == fields.size()) continue;
      for_each_subset(fields, size, [&](const auto& subset) { score_subset(rules, subset, best); });
    }
  }

  RankedChartTypes ranked;
  for (auto& [_, entry] : best) ranked.entries.push_back(std::move(entry));
  std::stable_sort(ranked.entries.begin(), ranked.entries.end(),
                   [](const RankedChart& a, const RankedChart& b) { return a.score > b.score; });

  if (explicit_request && request_satisfiable(*explicit_request, profiles)) {
    std::erase_if(ranked.entries, [&](const RankedChart& e) { return e.chart_type == *explicit_request; });
    ranked.entries.insert(ranked.entries.begin(), {*explicit_request, 1.0, kUserRequestedReason});
  }
  if (ranked.entries.empty()) {
    throw Error(ErrorCode::NotPlottable, "no chart type fits these columns");
  }
  return ranked;
}

bool request_satisfiable(ChartType chart_type, const std::vector<ColumnProfile>& profiles) {
  std::size_t dims = 0;
  std::size_t categorical = 0;
  std::size_t quant = 0;
  for (const auto& p : profiles) {
    if (p.semantic_type == SemanticType::Quantitative) ++quant;
    if (is_dimension(p.semantic_type)) ++dims;
    if (p.semantic_type == SemanticType::Categorical || p.semantic_type == SemanticType::Boolean) {
      ++categorical;
    }
  }
  switch (chart_type) {
    case ChartType::Bar:
    case ChartType::Line:
    case ChartType::Area: return quant >= 1 && dims + quant >= 2;
    case ChartType::Pie: return quant >= 1 && categorical >= 1;
    case ChartType::Scatter: return quant >= 2;
    case ChartType::Histogram: return quant >= 1;
    case ChartType::Heatmap: return quant >= 1 && dims >= 2;
  }
  return false;
}

std::optional<ChartType> requested_chart_type(std::string_view text) {
  const auto tokens = intent::tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "heat" && i + 1 < tokens.size() && tokens[i + 1] == "map") return ChartType::Heatmap;
    if (auto t = chart_type_from_string(tokens[i])) return t;
  }
  return std::nullopt;
}

}  // namespace vizgen::viz
