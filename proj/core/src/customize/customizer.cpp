#include "vizgen/customize/customizer.hpp"

#include "vizgen/error.hpp"
#include "vizgen/viz/builder.hpp"
#include "vizgen/viz/ranker.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

namespace vizgen::customize {
namespace {

using viz::Channel;
using viz::ChartSpec;

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(std::move(current));
  return parts;
}

[[noreturn]] void bad_value(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::BadValue, path + ": " + why, path);
}

std::string string_value(const PatchOp& op) {
  if (!op.value || !op.value->is_string()) bad_value(op.path, "expected a string value");
  return op.value->get<std::string>();
}

sql::ResultTable table_of(const ChartSpec& c) {
  sql::ResultTable t;
  t.source_sql = c.source_sql;
  for (const auto& col : c.data.columns) t.columns.push_back({col.name, col.semantic_type});
  for (std::size_t r = 0; r < c.data.row_count(); ++r) {
    std::vector<Value> row;
    for (const auto& col : c.data.columns) row.push_back(col.values[r]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void apply_op(ChartSpec& c, const PatchOp& op) {
  const auto parts = split_path(op.path);
  const bool set = op.op == OpKind::Set;
  if (set && !op.value) bad_value(op.path, "set requires a value");
  if (!set && op.value) bad_value(op.path, "remove takes no value");

  if (op.path == "mark") {
    if (!set) bad_value(op.path, "cannot remove the mark");
    const auto mark = viz::chart_type_from_string(string_value(op));
    if (!mark) bad_value(op.path, "unknown chart type");
    c.mark = *mark;
  } else if (op.path == "title") {
    if (!set) bad_value(op.path, "cannot remove the title");
    const std::string title = string_value(op);
    if (title.empty()) bad_value(op.path, "title is empty");
    c.title = title;
  } else if (op.path == "style.mark_color") {
    if (!set) {
      c.style.mark_color.reset();
      return;
    }
    const std::string color = string_value(op);
    if (!viz::is_valid_color(color)) bad_value(op.path, "not a CSS color name or #RRGGBB: " + color);
    c.style.mark_color = color;
  } else if (op.path == "style.palette") {
    if (!set) bad_value(op.path, "cannot remove the palette");
    const std::string palette = string_value(op);
    const auto& names = palette_names();
    if (std::find(names.begin(), names.end(), palette) == names.end()) {
      bad_value(op.path, "unknown palette " + palette);
    }
    c.style.palette = palette;
  } else if (op.path == "style.x_label" || op.path == "style.y_label") {
    std::string& label = op.path == "style.x_label" ? c.style.x_label : c.style.y_label;
    label = set ? string_value(op) : std::string{};
  } else if (parts.size() == 3 && parts[0] == "encodings") {
    const auto channel = viz::channel_from_string(parts[1]);
    if (!channel) throw Error(ErrorCode::IllegalPath, "unknown channel in " + op.path, op.path);
    auto it = c.encodings.find(*channel);
    const std::string& leaf = parts[2];
    if (leaf == "field") {
      if (!set) {
        c.encodings.erase(*channel);
        return;
      }
      const std::string field = string_value(op);
      const auto* col = c.data.find(field);
      if (!col) bad_value(op.path, "no column named " + field);
      auto& enc = c.encodings[*channel];
      enc.field = field;
      enc.semantic_type = col->semantic_type;
      return;
    }
    if (it == c.encodings.end()) bad_value(op.path, "chart has no " + parts[1] + " channel");
    if (leaf == "sort") {
      if (!set) {
        it->second.sort.reset();
        return;
      }
      const auto order = viz::sort_order_from_string(string_value(op));
      if (!order) bad_value(op.path, "expected asc or desc");
      it->second.sort = order;
    } else if (leaf == "aggregate") {
      if (!set) bad_value(op.path, "cannot remove the aggregate; set none");
      const auto agg = viz::aggregate_from_string(string_value(op));
      if (!agg) bad_value(op.path, "unknown aggregate");
      it->second.aggregate = *agg;
    } else {
      throw Error(ErrorCode::IllegalPath, "path not allowed: " + op.path, op.path);
    }
  } else {
    throw Error(ErrorCode::IllegalPath, "path not allowed: " + op.path, op.path);
  }
}

std::optional<viz::ChartType> chart_word(const std::string& word) {
  if (word == "column" || word == "columns" || word == "bars") return viz::ChartType::Bar;
  if (word == "lines") return viz::ChartType::Line;
  return viz::chart_type_from_string(word);
}

std::string strip_quotes(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ' || s.back() == '!')) s.pop_back();
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

struct Match {
  std::size_t position;
  PatchOp op;
};

}  // namespace

void to_json(Json& j, const PatchOp& op) {
  j = Json{{"op", op.op == OpKind::Set ? "set" : "remove"}, {"path", op.path}};
  if (op.value) j["value"] = *op.value;
}

void from_json(const Json& j, PatchOp& op) {
  const std::string kind = j.at("op").get<std::string>();
  if (kind != "set" && kind != "remove") throw Error(ErrorCode::BadValue, "op must be set or remove");
  op.op = kind == "set" ? OpKind::Set : OpKind::Remove;
  op.path = j.at("path").get<std::string>();
  op.value.reset();
  if (j.contains("value")) op.value = j.at("value");
}

void to_json(Json& j, const ChartPatch& p) { j = Json{{"target_chart", p.target_chart}, {"ops", p.ops}}; }

void from_json(const Json& j, ChartPatch& p) {
  p.target_chart = j.at("target_chart").get<std::string>();
  p.ops = j.at("ops").get<std::vector<PatchOp>>();
}

bool path_allowed(std::string_view path) {
  static const std::set<std::string, std::less<>> fixed = {
      "mark", "title", "style.mark_color", "style.palette", "style.x_label", "style.y_label"};
  if (fixed.count(path)) return true;
  const auto parts = split_path(path);
  return parts.size() == 3 && parts[0] == "encodings" && viz::channel_from_string(parts[1]) &&
         (parts[2] == "sort" || parts[2] == "aggregate" || parts[2] == "field");
}

const std::vector<std::string_view>& palette_names() {
  static const std::vector<std::string_view> names = {
      "category10", "category20", "tableau10", "tableau20", "set1",   "set2",   "set3",
      "pastel1",    "pastel2",    "dark2",     "accent",    "paired", "viridis", "plasma",
      "magma",      "inferno",    "blues",     "greens",    "reds",   "greys",  "oranges",
      "purples"};
  return names;
}

ChartPatch lexicon_parse(std::string_view command, const ChartSpec& chart) {
  const std::string original(command);
  const std::string text = sql::to_lower(command);
  std::vector<Match> matches;
  std::smatch m;
  auto pos = [&](const std::smatch& sm) { return static_cast<std::size_t>(sm.position(0)); };
  auto set = [](std::string path, std::string value) {
    return PatchOp{OpKind::Set, std::move(path), Json(std::move(value))};
  };

  static const std::regex color_to(R"(\b(?:colou?r|recolou?r|paint)\b.*?\b(?:to|in|as)\s+(#[0-9a-f]{6}|[a-z]+)\b)");
  static const std::regex color_it(R"(\b(?:make it|recolou?r it|colou?r it|paint it|turn it)\s+(#[0-9a-f]{6}|[a-z]+)\b)");
  if (std::regex_search(text, m, color_to) && viz::is_valid_color(m[1].str())) {
    matches.push_back({pos(m), set("style.mark_color", m[1].str())});
  } else if (std::regex_search(text, m, color_it) && viz::is_valid_color(m[1].str())) {
    matches.push_back({pos(m), set("style.mark_color", m[1].str())});
  }

  static const std::regex mark(
      R"(\b(?:make it|switch to|switch it to|change it to|change to|turn it into|convert it to|convert to|show it as|use)\s+(?:an?\s+)?(heat\s?map|[a-z]+)\b)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), mark); it != std::sregex_iterator(); ++it) {
    std::string word = (*it)[1].str();
    std::erase(word, ' ');
    if (auto t = chart_word(word)) {
      matches.push_back({static_cast<std::size_t>(it->position(0)), set("mark", std::string(viz::to_string(*t)))});
      break;
    }
  }

  static const std::regex title(
      R"(\b(?:title it|rename it to|rename the chart to|rename to|retitle it to|retitle it|retitle to|retitle|set the title to|change the title to)\s+(.+)$)",
      std::regex::icase);
  if (std::smatch om; std::regex_search(original, om, title)) {
    const std::string value = strip_quotes(om[1].str());
    if (!value.empty()) matches.push_back({static_cast<std::size_t>(om.position(0)), set("title", value)});
  }

  static const std::regex sort(R"(\bsort(?:ed)? by\s+([a-z0-9_()]+)(?:\s+(asc|ascending|desc|descending))?)");
  if (std::regex_search(text, m, sort)) {
    const std::string field = m[1].str();
    const bool known = std::any_of(chart.data.columns.begin(), chart.data.columns.end(),
                                   [&](const auto& c) { return sql::iequals(c.name, field); });
    if (known) {
      const auto order = m[2].matched ? viz::sort_order_from_string(m[2].str()) : viz::SortOrder::Asc;
      matches.push_back({pos(m), set("encodings.x.sort", std::string(viz::to_string(*order)))});
    }
  }

  static const std::regex aggregate(R"(\b(?:use|show|switch to)\s+(?:the\s+)?(average|avg|mean|sum|total|count|min|minimum|max|maximum)\b)");
  if (std::regex_search(text, m, aggregate)) {
    std::string agg = m[1].str();
    if (agg == "total") agg = "sum";
    if (agg == "minimum") agg = "min";
    if (agg == "maximum") agg = "max";
    matches.push_back({pos(m), set("encodings.y.aggregate",
                                   std::string(viz::to_string(*viz::aggregate_from_string(agg))))});
  }

  static const std::regex axis_label(
      R"(\b(?:label the|set the|rename the|call the)\s+(x|y)[\s-]?axis(?:\s+label)?\s+(?:to\s+|as\s+)?(.+)$)",
      std::regex::icase);
  if (std::smatch om; std::regex_search(original, om, axis_label)) {
    const std::string value = strip_quotes(om[2].str());
    const std::string axis = sql::to_lower(om[1].str());
    if (!value.empty()) {
      matches.push_back({static_cast<std::size_t>(om.position(0)), set("style." + axis + "_label", value)});
    }
  }

  static const std::regex palette(R"(\b(?:use|switch to|set|apply)\s+(?:the\s+)?([a-z0-9]+)\s+palette\b)");
  if (std::regex_search(text, m, palette)) {
    matches.push_back({pos(m), set("style.palette", m[1].str())});
  }

  std::stable_sort(matches.begin(), matches.end(),
                   [](const Match& a, const Match& b) { return a.position < b.position; });
  ChartPatch patch;
  patch.target_chart = chart.chart_id;
  for (auto& mt : matches) {
    // The aggregate rule's "use" also feeds the mark rule; keep one op per path.
    const bool dup = std::any_of(patch.ops.begin(), patch.ops.end(),
                                 [&](const PatchOp& o) { return o.path == mt.op.path; });
    if (!dup) patch.ops.push_back(std::move(mt.op));
  }
  return patch;
}

ChartPatch parse_customization(std::string_view command, const ChartSpec& chart,
                               const providers::Providers& providers, providers::ModelUsage* usage) {
  ChartPatch patch = lexicon_parse(command, chart);
  if (!patch.ops.empty()) return patch;
  if (providers.model_for(providers::TaskTag::CustomizeParse)->enabled()) {
    std::string ctx = "Command: " + std::string(command) + "\nChart: " + std::string(viz::to_string(chart.mark)) +
                      " titled \"" + chart.title + "\" with fields";
    for (const auto& col : chart.data.columns) ctx += " " + col.name;
    ctx += "\nAllowed paths: mark, title, style.mark_color, style.palette, style.x_label, style.y_label,"
           " encodings.<channel>.sort, encodings.<channel>.aggregate, encodings.<channel>.field";
    const providers::StructuredPrompt prompt{providers::TaskTag::CustomizeParse, ctx,
                                             {{"ops", providers::FieldKind::Array, true}}};
    try {
      const Json reply = providers::complete(providers, prompt, usage).value;
      for (const auto& item : reply.at("ops")) {
        try {
          auto op = item.get<PatchOp>();
          if (path_allowed(op.path)) patch.ops.push_back(std::move(op));
        } catch (const std::exception&) {
          // Malformed ops are dropped.
        }
      }
    } catch (const Error&) {
    }
  }
  if (patch.ops.empty()) {
    throw Error(ErrorCode::Unparseable, "could not map the command to a chart change");
  }
  return patch;
}

ValidatedPatch validate_patch(const ChartSpec& chart, const ChartPatch& patch) {
  if (patch.ops.empty()) throw Error(ErrorCode::InvalidArgument, "patch has no ops");
  if (patch.target_chart != chart.chart_id) {
    throw Error(ErrorCode::UnknownChart, "patch targets " + patch.target_chart, patch.target_chart);
  }
  ValidatedPatch out{patch, {}};
  ChartSpec candidate = chart;
  bool mark_changed = false;
  for (const auto& op : patch.ops) {
    if (!path_allowed(op.path)) throw Error(ErrorCode::IllegalPath, "path not allowed: " + op.path, op.path);
    apply_op(candidate, op);
    mark_changed = mark_changed || op.path == "mark";
  }
  if (!viz::self_check(candidate).empty()) {
    if (!mark_changed) bad_value(patch.ops.back().path, viz::self_check(candidate).front());
    // Reassign fields per the builder's rules, keeping the same channels.
    const std::string mark(viz::to_string(candidate.mark));
    viz::ChartSpec rebuilt;
    try {
      const auto table = table_of(candidate);
      rebuilt = viz::build_chart_spec(candidate.mark, viz::profile_columns(table), table, "");
    } catch (const Error&) {
      throw Error(ErrorCode::IncompatibleMark, mark + " cannot be drawn from this chart's fields", mark);
    }
    std::set<Channel> before, after;
    for (const auto& [ch, _] : candidate.encodings) before.insert(ch);
    for (const auto& [ch, _] : rebuilt.encodings) after.insert(ch);
    if (before != after) {
      throw Error(ErrorCode::IncompatibleMark, mark + " needs different channels than this chart has", mark);
    }
    for (const auto& [ch, enc] : rebuilt.encodings) {
      if (candidate.encodings.at(ch).field == enc.field) continue;
      PatchOp extra{OpKind::Set, "encodings." + std::string(viz::to_string(ch)) + ".field", Json(enc.field)};
      apply_op(candidate, extra);
      out.patch.ops.push_back(std::move(extra));
    }
    if (!viz::self_check(candidate).empty()) {
      throw Error(ErrorCode::IncompatibleMark, mark + " is incompatible with this chart", mark);
    }
  }
  if (mark_changed && candidate.mark != chart.mark) {
    double score = 0.0;
    try {
      const auto ranked = viz::rank_charts(viz::profile_columns(table_of(candidate)));
      if (const auto* e = ranked.find(candidate.mark)) score = e->score;
    } catch (const Error&) {
    }
    if (score < kPoorMarkScore) {
      out.warnings.push_back(std::string(viz::to_string(candidate.mark)) +
                             " is a poor fit for these fields (score " + std::to_string(score).substr(0, 4) + ")");
    }
  }
  return out;
}

ChartSpec apply_patch(const ChartSpec& chart, const ChartPatch& patch) {
  const ValidatedPatch validated = validate_patch(chart, patch);
  ChartSpec next = chart;
  for (const auto& op : validated.patch.ops) apply_op(next, op);
  next.revision = chart.revision + 1;
  return next;
}

}  // namespace vizgen::customize
