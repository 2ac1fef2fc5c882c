#pragma once

#include "vizgen/analysis/insights.hpp"
#include "vizgen/intent/classifier.hpp"
#include "vizgen/providers/providers.hpp"
#include "vizgen/sql/database.hpp"
#include "vizgen/sql/validator.hpp"
#include "vizgen/viz/ranker.hpp"
#include "vizgen/workflow/graph.hpp"
#include "vizgen/workflow/state.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace vizgen::workflow {

struct TurnConfig {
  std::int64_t row_cap = sql::kDefaultRowCap;
  std::int64_t deadline_ms = sql::kDefaultDeadlineMs;
  std::int64_t default_limit = sql::kDefaultLimit;
  int results_per_query = explain::kDefaultResultsPerQuery;
  analysis::Thresholds thresholds;
  std::shared_ptr<const intent::Lexicon> lexicon;  // null: defaults
  std::shared_ptr<const viz::RuleTable> rules;     // null: defaults

  const intent::Lexicon& lexicon_or_default() const;
  const viz::RuleTable& rules_or_default() const;
};

struct TurnOptions {
  TurnConfig config;
  std::shared_ptr<const Clock> clock = system_clock();
};

struct StepOutcome {
  Node node = Node::System;
  std::optional<Json> output;  // set on success
  std::optional<ErrorNotice> error;
};

// Working set handed to node handlers.
struct TurnContext {
  ConversationState& state;
  const UserMessage& message;
  const intent::IntentSet& intents;
  const providers::Providers& providers;
  const TurnConfig& config;
  const Clock& clock;  // fixed at message.received_at
  const std::vector<StepOutcome>& previous;
  providers::ModelUsage usage;
  std::vector<std::string> warnings;
};

// System, SqlAgent, VisualizationAgent, AnalysisAgent, ExplanationAgent and
// Customizer as shipped.
NodeRegistry default_registry();
const WorkflowGraph& default_graph();

struct TurnResult {
  ConversationState state;
  ResponseBundle bundle;
  std::vector<TraceEvent> trace;  // this turn's events, also appended to state.trace
};

// Never throws: node failures become bundle errors and error trace events.
// Appends exactly one history entry.
TurnResult run_turn(const ConversationState& state, const UserMessage& message,
                    const WorkflowGraph& graph = default_graph(),
                    const providers::Providers& providers = providers::Providers::offline(),
                    const TurnOptions& options = {});

inline constexpr char kHelpMessage[] =
    "I can query your database, chart the results, find trends, anomalies and correlations, "
    "explain findings with outside context, and restyle the last chart. Try \"show total amount "
    "by month as a line chart\" or \"connect to /path/to/data.db\".";

// Deterministic message template over the step outcomes in plan order.
ResponseBundle generate_response(const ConversationState& state,
                                 const std::vector<StepOutcome>& steps,
                                 std::vector<std::string> warnings = {});

// Re-executes the turn and compares node, status and digests event by event.
// Throws DigestMismatch naming the first node that diverges.
TurnResult replay_trace(const ConversationState& state_before, const UserMessage& message,
                        const std::vector<TraceEvent>& recorded,
                        const WorkflowGraph& graph = default_graph(),
                        const providers::Providers& providers = providers::Providers::offline(),
                        const TurnOptions& options = {});

// Digest of the state as nodes see it; the trace is excluded so durations
// never leak into digests.
std::string state_digest(const ConversationState& state);

}  // namespace vizgen::workflow
