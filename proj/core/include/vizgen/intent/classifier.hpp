#pragma once

#include "vizgen/json_util.hpp"
#include "vizgen/providers/providers.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::intent {

// Declaration order is the routing precedence; Other is never mixed.
enum class Intent { Visualization, Insight, Explanation, Customization, System, Other };

inline constexpr std::array<Intent, 6> kAllIntents = {Intent::Visualization, Intent::Insight,
                                                      Intent::Explanation, Intent::Customization,
                                                      Intent::System, Intent::Other};

std::string_view to_string(Intent intent);
// Case-insensitive.
std::optional<Intent> intent_from_string(std::string_view name);

enum class Source { Rule, Model };

struct IntentEntry {
  Intent intent = Intent::Other;
  double confidence = 1.0;
  Source source = Source::Rule;

  bool operator==(const IntentEntry&) const = default;
};

struct IntentSet {
  std::vector<IntentEntry> entries;

  bool contains(Intent intent) const;
  std::vector<Intent> intents() const;
  // Throws Internal when empty, duplicated, mis-ordered, or Other is mixed.
  void check_invariants() const;
  bool operator==(const IntentSet&) const = default;
};

void to_json(Json& j, const IntentSet& s);
void from_json(const Json& j, IntentSet& s);

// Keywords are matched as whole lowercase tokens; multi-word entries match
// consecutive tokens.
class Lexicon {
 public:
  static const Lexicon& defaults();
  // Lines of the form "visualization: chart, plot, trend over time".
  // Blank lines and lines starting with '#' are ignored. Throws
  // InvalidArgument on an unknown intent or a malformed line.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& file);

  // Adds `other`'s keywords to this lexicon.
  void extend(const Lexicon& other);
  const std::vector<std::string>& keywords(Intent intent) const;

 private:
  std::map<Intent, std::vector<std::string>> keywords_;
};

std::vector<std::string> tokenize(std::string_view text);

struct ClassifyContext {
  bool has_chart = false;
  std::vector<std::string> chart_fields;     // fields encoded by the active chart
  std::vector<std::string> dataset_columns;  // columns of the last table and cached schema
};

IntentSet rule_classify(std::string_view text, const ClassifyContext& context,
                        const Lexicon& lexicon = Lexicon::defaults());

// Rule result, refined by the model when one is enabled: the model may add
// intents (confidence kModelConfidence) but never removes rule hits. Labels
// outside the six are discarded. A provider failure yields the rule result
// and is reported through `usage`.
inline constexpr double kModelConfidence = 0.8;

IntentSet classify(std::string_view text, const ClassifyContext& context,
                   const providers::Providers& providers,
                   const Lexicon& lexicon = Lexicon::defaults(),
                   providers::ModelUsage* usage = nullptr);

}  // namespace vizgen::intent
