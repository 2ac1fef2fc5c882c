#include "vizgen/intent/classifier.hpp"

#include "vizgen/error.hpp"
#include "vizgen/sql/schema.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace vizgen::intent {
namespace {

constexpr std::array<std::string_view, 6> kIntentNames = {
    "Visualization", "Insight", "Explanation", "Customization", "System", "Other"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool matches(const std::vector<std::string>& tokens, const std::string& keyword) {
  const auto phrase = tokenize(keyword);
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

void sort_by_precedence(IntentSet& set) {
  std::stable_sort(set.entries.begin(), set.entries.end(),
                   [](const IntentEntry& a, const IntentEntry& b) { return a.intent < b.intent; });
}

}  // namespace

std::string_view to_string(Intent intent) { return kIntentNames[static_cast<std::size_t>(intent)]; }

std::optional<Intent> intent_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kIntentNames.size(); ++i) {
    if (sql::iequals(kIntentNames[i], trim(name))) return static_cast<Intent>(i);
  }
  return std::nullopt;
}

bool IntentSet::contains(Intent intent) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const IntentEntry& e) { return e.intent == intent; });
}

std::vector<Intent> IntentSet::intents() const {
  std::vector<Intent> out;
  for (const auto& e : entries) out.push_back(e.intent);
  return out;
}

void IntentSet::check_invariants() const {
  if (entries.empty()) throw Error(ErrorCode::Internal, "empty intent set");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (!(entries[i - 1].intent < entries[i].intent)) {
      throw Error(ErrorCode::Internal, "intent set duplicated or out of order");
    }
  }
  if (contains(Intent::Other) && entries.size() > 1) {
    throw Error(ErrorCode::Internal, "Other mixed with other intents");
  }
  for (const auto& e : entries) {
    if (e.confidence < 0.0 || e.confidence > 1.0) throw Error(ErrorCode::Internal, "bad confidence");
  }
}

void to_json(Json& j, const IntentSet& s) {
  j = Json::array();
  for (const auto& e : s.entries) {
    j.push_back({{"intent", to_string(e.intent)},
                 {"confidence", e.confidence},
                 {"source", e.source == Source::Rule ? "rule" : "model"}});
  }
}

void from_json(const Json& j, IntentSet& s) {
  s.entries.clear();
  for (const auto& e : j) {
    auto intent = intent_from_string(e.at("intent").get<std::string>());
    if (!intent) throw Error(ErrorCode::InvalidArgument, "unknown intent");
    s.entries.push_back({*intent, e.at("confidence").get<double>(),
                         e.at("source").get<std::string>() == "model" ? Source::Model : Source::Rule});
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

const Lexicon& Lexicon::defaults() {
  static const Lexicon lexicon = parse(
      "visualization: chart, plot, graph, show, visualize, bar, line, scatter, histogram, "
      "heatmap, pie, trend over time\n"
      "insight: trend, anomaly, anomalies, spike, pattern, correlation, unusual, outlier, insight\n"
      "explanation: explain, why, reason, context\n"
      "customization: change, recolor, rename, resize, retitle, make it, set the, switch to\n"
      "system: connect, disconnect, database, export\n");
  return lexicon;
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "lexicon line " + std::to_string(number) + " has no ':'");
    }
    const auto intent = intent_from_string(t.substr(0, colon));
    if (!intent || *intent == Intent::Other) {
      throw Error(ErrorCode::InvalidArgument,
                  "lexicon line " + std::to_string(number) + " names an unknown intent");
    }
    std::istringstream words(t.substr(colon + 1));
    std::string word;
    auto& list = lex.keywords_[*intent];
    while (std::getline(words, word, ',')) {
      std::string kw = sql::to_lower(trim(word));
      if (!kw.empty() && std::find(list.begin(), list.end(), kw) == list.end()) list.push_back(kw);
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read lexicon " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Lexicon::extend(const Lexicon& other) {
  for (const auto& [intent, words] : other.keywords_) {
    auto& list = keywords_[intent];
    for (const auto& w : words) {
      if (std::find(list.begin(), list.end(), w) == list.end()) list.push_back(w);
    }
  }
}

const std::vector<std::string>& Lexicon::keywords(Intent intent) const {
  static const std::vector<std::string> kEmpty;
  auto it = keywords_.find(intent);
  return it == keywords_.end() ? kEmpty : it->second;
}

IntentSet rule_classify(std::string_view text, const ClassifyContext& context,
                        const Lexicon& lexicon) {
  const auto tokens = tokenize(text);
  IntentSet set;
  for (Intent intent : kAllIntents) {
    if (intent == Intent::Other) continue;
    const auto& words = lexicon.keywords(intent);
    if (std::any_of(words.begin(), words.end(), [&](const auto& w) { return matches(tokens, w); })) {
      set.entries.push_back({intent, 1.0, Source::Rule});
    }
  }
  if (context.has_chart && set.contains(Intent::Customization) && set.contains(Intent::Visualization)) {
    // A new data column keeps Visualization; restyling the active chart does not.
    const bool names_new_column = std::any_of(
        context.dataset_columns.begin(), context.dataset_columns.end(), [&](const std::string& col) {
          const bool on_chart = std::any_of(context.chart_fields.begin(), context.chart_fields.end(),
                                            [&](const std::string& f) { return sql::iequals(f, col); });
          return !on_chart && matches(tokens, sql::to_lower(col));
        });
    if (!names_new_column) {
      std::erase_if(set.entries, [](const IntentEntry& e) { return e.intent == Intent::Visualization; });
    }
  }
  if (set.entries.empty()) set.entries.push_back({Intent::Other, 1.0, Source::Rule});
  return set;
}

IntentSet classify(std::string_view text, const ClassifyContext& context,
                   const providers::Providers& providers, const Lexicon& lexicon,
                   providers::ModelUsage* usage) {
  IntentSet set = rule_classify(text, context, lexicon);
  if (!providers.model_for(providers::TaskTag::IntentRefine)->enabled()) return set;

  std::string ctx = "Message: " + std::string(text) +
                    "\nLabels: Visualization, Insight, Explanation, Customization, System, Other"
                    "\nRule result:";
  for (const auto& e : set.entries) ctx += " " + std::string(to_string(e.intent));
  ctx += context.has_chart ? "\nA chart is active." : "\nNo chart is active.";
  const providers::StructuredPrompt prompt{providers::TaskTag::IntentRefine, ctx,
                                           {{"intents", providers::FieldKind::Array, true}}};
  Json reply;
  try {
    reply = providers::complete(providers, prompt, usage).value;
  } catch (const Error&) {
    return set;
  }
  for (const auto& item : reply.at("intents")) {
    std::string label;
    if (item.is_string()) label = item.get<std::string>();
    else if (item.is_object() && item.contains("intent") && item["intent"].is_string())
      label = item["intent"].get<std::string>();
    const auto intent = intent_from_string(label);
    if (!intent || *intent == Intent::Other || set.contains(*intent)) continue;
    std::erase_if(set.entries, [](const IntentEntry& e) { return e.intent == Intent::Other; });
    set.entries.push_back({*intent, kModelConfidence, Source::Model});
  }
  sort_by_precedence(set);
  return set;
}

}  // namespace vizgen::intent
