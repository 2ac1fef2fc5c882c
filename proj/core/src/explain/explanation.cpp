#include "vizgen/explain/explanation.hpp"

#include "vizgen/error.hpp"
#include "vizgen/intent/classifier.hpp"
#include "vizgen/sql/schema.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

namespace vizgen::explain {
namespace {

using analysis::AnomalyFinding;
using analysis::CorrelationFinding;
using analysis::Direction;
using analysis::TrendFinding;

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",     "about", "all",   "an",    "and",   "any",   "are",   "as",    "at",     "be",
      "been",  "biggest", "but", "by",    "can",   "could", "did",   "do",    "does",   "during",
      "each",  "find",  "for",   "from",  "give",  "had",   "has",   "have",  "how",    "i",
      "in",    "into",  "is",    "it",    "its",   "me",    "most",  "my",    "of",     "on",
      "or",    "our",   "please", "so",   "some",  "tell",  "than",  "that",  "the",    "their",
      "them",  "then",  "there", "these", "they",  "this",  "those", "to",    "us",     "was",
      "we",    "were",  "what",  "when",  "where", "which", "while", "who",   "will",   "with",
      "would", "you",   "your",  "main",  "over",  "time"};
  return words;
}

bool is_intent_word(const std::string& lower) {
  for (auto intent : intent::kAllIntents) {
    if (intent == intent::Intent::Other) continue;
    for (const auto& kw : intent::Lexicon::defaults().keywords(intent)) {
      if (kw == lower) return true;
    }
  }
  return false;
}

// "SUM(amount)" -> "amount"; underscores read as spaces.
std::string subject_of(const std::string& field) {
  static const std::regex call(R"(^\s*[A-Za-z_]+\s*\(\s*(?:DISTINCT\s+)?(.*?)\s*\)\s*$)", std::regex::icase);
  std::smatch m;
  std::string s = std::regex_match(field, m, call) && m[1].str() != "*" ? m[1].str() : field;
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

std::string clip_query(std::string q) {
  if (q.size() <= kMaxQueryLength) return q;
  q.resize(kMaxQueryLength);
  if (auto sp = q.find_last_of(' '); sp != std::string::npos && sp > 0) q.resize(sp);
  return q;
}

std::string finding_subject(const analysis::Finding& f) {
  if (const auto* t = std::get_if<TrendFinding>(&f)) {
    return subject_of(t->field) + (t->direction == Direction::Increasing ? " growth" : " decline");
  }
  if (const auto* a = std::get_if<AnomalyFinding>(&f)) {
    return subject_of(a->field) + (a->score >= 0 ? " spike" : " drop");
  }
  const auto& c = std::get<CorrelationFinding>(f);
  return subject_of(c.field_a) + " " + subject_of(c.field_b) + " correlation";
}

std::string clip_snippet(const std::string& s, std::size_t limit = 200) {
  if (s.size() <= limit) return s;
  std::string out = s.substr(0, limit);
  if (auto sp = out.find_last_of(' '); sp != std::string::npos && sp > limit / 2) out.resize(sp);
  return out + "...";
}

}  // namespace

void to_json(Json& j, const SearchPlan& p) {
  j = Json{{"queries", p.queries}, {"rationale", p.rationale}, {"insight_digest", p.insight_digest}};
}

void from_json(const Json& j, SearchPlan& p) {
  p.queries = j.at("queries").get<std::vector<std::string>>();
  p.rationale = j.at("rationale").get<std::string>();
  p.insight_digest = j.at("insight_digest").get<std::string>();
}

void to_json(Json& j, const EvidenceSet& e) {
  j = Json{{"items", e.items}, {"plan_digest", e.plan_digest}, {"warnings", e.warnings}};
}

void from_json(const Json& j, EvidenceSet& e) {
  e.items = j.at("items").get<std::vector<providers::SearchResultItem>>();
  e.plan_digest = j.at("plan_digest").get<std::string>();
  e.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(Json& j, const Explanation& e) {
  j = Json{{"text", e.text},
           {"citations", e.citations},
           {"insight_digest", e.insight_digest},
           {"grounded", e.grounded}};
}

void from_json(const Json& j, Explanation& e) {
  e.text = j.at("text").get<std::string>();
  e.citations = j.at("citations").get<std::vector<std::string>>();
  e.insight_digest = j.at("insight_digest").get<std::string>();
  e.grounded = j.at("grounded").get<bool>();
}

std::string insight_digest(const analysis::InsightReport& report) { return digest(Json(report)); }

std::vector<std::string> domain_keywords(std::string_view question) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    const std::string lower = sql::to_lower(current);
    if (!stopwords().count(lower) && !is_intent_word(lower) && seen.insert(lower).second) {
      out.push_back(current);
    }
    current.clear();
  };
  for (char c : question) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

SearchPlan plan_searches(const analysis::InsightReport& report, std::string_view question) {
  if (report.findings.empty()) throw Error(ErrorCode::NoFindings, "the insight has no findings");
  const auto keywords = domain_keywords(question);
  SearchPlan plan;
  plan.insight_digest = insight_digest(report);
  const std::size_t used = std::min(report.findings.size(), kQueriesFromFindings);
  for (std::size_t i = 0; i < used; ++i) {
    std::string q = finding_subject(report.findings[i]);
    const auto subject_tokens = intent::tokenize(q);
    for (const auto& kw : keywords) {
      const std::string lower = sql::to_lower(kw);
      if (std::find(subject_tokens.begin(), subject_tokens.end(), lower) == subject_tokens.end()) {
        q += " " + kw;
      }
    }
    q = clip_query(std::move(q));
    if (std::find(plan.queries.begin(), plan.queries.end(), q) == plan.queries.end()) {
      plan.queries.push_back(std::move(q));
    }
  }
  plan.rationale = "one query for each of the top " + std::to_string(used) + " of " +
                   std::to_string(report.findings.size()) + " findings";
  return plan;
}

EvidenceSet execute_search_plan(const SearchPlan& plan, providers::SearchAdapter& adapter,
                                int k_per_query) {
  if (k_per_query < 1 || k_per_query > 5) {
    throw Error(ErrorCode::InvalidArgument, "k_per_query must be in [1, 5]");
  }
  EvidenceSet evidence;
  evidence.plan_digest = digest(Json(plan));
  std::set<std::string> urls;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < plan.queries.size(); ++i) {
    try {
      for (auto& item : providers::search(adapter, plan.queries[i], k_per_query)) {
        if (urls.insert(item.url).second) evidence.items.push_back(std::move(item));
      }
    } catch (const Error& e) {
      ++failures;
      evidence.warnings.push_back("search failed for query " + std::to_string(i + 1) + ": " +
                                  std::string(to_string(e.code())));
    }
  }
  if (!plan.queries.empty() && failures == plan.queries.size()) {
    evidence.warnings.push_back("AllQueriesFailed");
  }
  return evidence;
}

Explanation synthesize_explanation(const analysis::InsightReport& report, const EvidenceSet& evidence,
                                   const providers::Providers& providers,
                                   providers::ModelUsage* usage) {
  if (report.findings.empty()) throw Error(ErrorCode::NoFindings, "the insight has no findings");
  Explanation out;
  out.insight_digest = insight_digest(report);

  std::string summary;
  for (std::size_t i = 0; i < std::min(report.findings.size(), kQueriesFromFindings); ++i) {
    summary += (summary.empty() ? "" : " ") + analysis::describe_finding(report.findings[i]);
  }

  if (evidence.items.empty()) {
    out.text = summary + " Note: " + kNoContextMarker + ".";
    return out;
  }

  if (providers.model_for(providers::TaskTag::ExplainSynthesize)->enabled()) {
    std::string ctx = "Findings:\n" + summary + "\nEvidence:\n";
    for (std::size_t i = 0; i < evidence.items.size(); ++i) {
      const auto& item = evidence.items[i];
      ctx += "[" + std::to_string(i + 1) + "] " + item.title + " <" + item.url + ">: " + item.snippet + "\n";
    }
    ctx += "Explain the findings using only this evidence and cite the urls you use.";
    const providers::StructuredPrompt prompt{providers::TaskTag::ExplainSynthesize, ctx,
                                             {{"text", providers::FieldKind::String, true},
                                              {"citations", providers::FieldKind::Array, true}}};
    try {
      const Json reply = providers::complete(providers, prompt, usage).value;
      std::vector<std::string> cited;
      for (const auto& c : reply.at("citations")) {
        if (!c.is_string()) continue;
        const std::string url = c.get<std::string>();
        const bool known = std::any_of(evidence.items.begin(), evidence.items.end(),
                                       [&](const auto& item) { return item.url == url; });
        if (known && std::find(cited.begin(), cited.end(), url) == cited.end()) cited.push_back(url);
      }
      const std::string text = reply.at("text").get<std::string>();
      if (!cited.empty() && !text.empty()) {
        out.text = text;
        out.citations = std::move(cited);
        out.grounded = true;
        return out;
      }
    } catch (const Error&) {
      // Template below.
    }
  }

  out.text = summary + " External context:";
  for (std::size_t i = 0; i < std::min(evidence.items.size(), kMaxCitations); ++i) {
    const auto& item = evidence.items[i];
    out.text += " [" + std::to_string(i + 1) + "] " + item.title + ": \"" + clip_snippet(item.snippet) +
                "\" (" + item.url + ").";
    out.citations.push_back(item.url);
  }
  out.grounded = true;
  return out;
}

}  // namespace vizgen::explain
