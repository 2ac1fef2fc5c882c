#include "vizgen/workflow/engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>

namespace vizgen::workflow {
namespace {

std::int64_t elapsed_ms(Timestamp from, Timestamp to) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(to - from).count();
}

intent::ClassifyContext classify_context(const ConversationState& state) {
  intent::ClassifyContext ctx;
  if (!state.charts.empty()) {
    ctx.has_chart = true;
    for (const auto& [channel, enc] : state.charts.back().encodings) ctx.chart_fields.push_back(enc.field);
  }
  if (state.last_table) {
    for (const auto& c : state.last_table->columns) ctx.dataset_columns.push_back(c.name);
  }
  if (state.schema_cache) {
    for (const auto& t : state.schema_cache->tables) {
      for (const auto& c : t.columns) ctx.dataset_columns.push_back(c.name);
    }
  }
  return ctx;
}

Json step_json(const StepOutcome& s) {
  Json j{{"node", to_string(s.node)}};
  if (s.output) j["output"] = *s.output;
  if (s.error) j["error"] = *s.error;
  return j;
}

void add_chart(ResponseBundle& bundle, const ConversationState& state, const Json& output) {
  const auto id = output.at("chart_id").get<std::string>();
  const auto* chart = state.find_chart(id);
  if (!chart) return;
  std::erase_if(bundle.charts, [&](const viz::ChartSpec& c) { return c.chart_id == id; });
  bundle.charts.push_back(*chart);
}

std::string error_sentence(const StepOutcome& s) {
  return fmt::format("{} could not finish: {} ({}).", to_string(s.node), to_string(s.error->code),
                     s.error->message);
}

TurnResult run_turn_unchecked(const ConversationState& state, const UserMessage& message,
                              const WorkflowGraph& graph, const providers::Providers& providers,
                              const TurnOptions& options) {
  static const SystemClock fallback_clock;
  const Clock& clock = options.clock ? *options.clock : fallback_clock;
  const TurnConfig& config = options.config;

  // Nodes see the message's receipt time; the real clock only times steps.
  const FixedClock turn_clock(message.received_at);

  TurnResult result;
  result.state = state;
  auto& working = result.state;
  if (working.session_id.empty()) working.session_id = message.session_id;

  std::vector<StepOutcome> steps;
  std::vector<std::string> warnings;
  auto record = [&](TraceEvent event) {
    working.trace.push_back(event);
    result.trace.push_back(std::move(event));
  };

  // Intent classification is not a graph node; it leaves a trace event only
  // when the model fails and the rules decide alone.
  providers::ModelUsage classify_usage;
  const auto classify_started = clock.now();
  const auto classify_input = digest({{"message", message}, {"state", state_digest(working)}});
  intent::IntentSet intents;
  try {
    intents = intent::classify(message.text, classify_context(working), providers,
                               config.lexicon_or_default(), &classify_usage);
  } catch (const Error& e) {
    intents = intent::rule_classify(message.text, classify_context(working), config.lexicon_or_default());
    classify_usage.failure = std::string(to_string(e.code())) + ": " + e.message();
  }
  if (classify_usage.failure) {
    const auto code_end = classify_usage.failure->find(':');
    record({"IntentClassifier", classify_input, digest(Json(intents)),
            elapsed_ms(classify_started, clock.now()),
            "error(" + classify_usage.failure->substr(0, code_end) + ")", classify_usage.attempts});
    warnings.push_back(fmt::format("IntentClassifier: model unavailable ({}); used keyword rules",
                                   *classify_usage.failure));
  }

  const auto plan = route(intents, working, message.text);
  for (Node node : plan.steps) {
    if (node == Node::ResponseGenerator) break;
    const auto deps = dependencies(node);
    const bool blocked = std::any_of(deps.begin(), deps.end(), [&](Node d) {
      if (!plan.contains(d)) return false;
      auto it = std::find_if(steps.begin(), steps.end(), [&](const StepOutcome& s) { return s.node == d; });
      return it == steps.end() || !it->output;
    });
    if (blocked) {
      steps.push_back({node, std::nullopt, std::nullopt});
      continue;
    }

    const auto input = digest({{"node", to_string(node)},
                               {"message", message},
                               {"intents", intents},
                               {"state", state_digest(working)}});
    const auto started = clock.now();
    auto backup = working;
    TurnContext ctx{working, message, intents, providers, config, turn_clock, steps, {}, {}};
    StepOutcome outcome{node, std::nullopt, std::nullopt};
    try {
      outcome.output = graph.handler(node)(ctx);
    } catch (const Error& e) {
      outcome.error = notice_from(e);
    } catch (const std::exception& e) {
      outcome.error = ErrorNotice{ErrorCode::Internal, e.what()};
    }
    if (outcome.error) working = std::move(backup);
    warnings.insert(warnings.end(), ctx.warnings.begin(), ctx.warnings.end());
    record({std::string(to_string(node)), input,
            outcome.output ? digest(*outcome.output) : digest(Json(*outcome.error)),
            elapsed_ms(started, clock.now()),
            outcome.error ? error_status(outcome.error->code) : std::string(kStatusOk), ctx.usage.attempts});
    steps.push_back(std::move(outcome));
  }

  Json step_docs = Json::array();
  for (const auto& s : steps) step_docs.push_back(step_json(s));
  const auto started = clock.now();
  const auto input = digest({{"node", to_string(Node::ResponseGenerator)},
                             {"steps", step_docs},
                             {"state", state_digest(working)}});
  result.bundle = generate_response(working, steps, std::move(warnings));
  // A turn that planned no agent (help reply) leaves no trace.
  if (plan.steps.size() > 1) {
    record({std::string(to_string(Node::ResponseGenerator)), input, digest(Json(result.bundle)),
            elapsed_ms(started, clock.now()), kStatusOk, 0});
  }
  working.history.push_back({message, result.bundle});
  return result;
}

}  // namespace

const intent::Lexicon& TurnConfig::lexicon_or_default() const {
  return lexicon ? *lexicon : intent::Lexicon::defaults();
}

const viz::RuleTable& TurnConfig::rules_or_default() const {
  return rules ? *rules : viz::RuleTable::defaults();
}

std::string state_digest(const ConversationState& state) {
  Json j = state;
  j.erase("trace");
  return digest(j);
}

ResponseBundle generate_response(const ConversationState& state, const std::vector<StepOutcome>& steps,
                                 std::vector<std::string> warnings) {
  ResponseBundle bundle;
  std::vector<std::string> sentences;
  for (const auto& s : steps) {
    if (s.error) {
      bundle.errors.push_back(*s.error);
      sentences.push_back(error_sentence(s));
      continue;
    }
    if (!s.output) continue;
    const Json& out = *s.output;
    switch (s.node) {
      case Node::System:
        sentences.push_back(out.at("summary").get<std::string>());
        break;
      case Node::SqlAgent: {
        const auto rows = out.at("rows").get<std::size_t>();
        const auto cols = out.at("columns").size();
        sentences.push_back(fmt::format("The query returned {} row{} and {} column{}{}.", rows, rows == 1 ? "" : "s",
                                        cols, cols == 1 ? "" : "s",
                                        out.at("truncated").get<bool>() ? " (truncated at the row cap)" : ""));
        break;
      }
      case Node::VisualizationAgent:
        add_chart(bundle, state, out);
      {
        const auto mark = out.at("mark").get<std::string>();
        const bool vowel = mark.find_first_of("aeiou") == 0;
        sentences.push_back(fmt::format("Created {} {} chart \"{}\" from {} rows.", vowel ? "an" : "a", mark,
                                        out.at("title").get<std::string>(), out.at("rows").get<std::size_t>()));
      }
        break;
      case Node::AnalysisAgent:
        if (!state.insights.empty()) {
          bundle.insight = state.insights.back();
          // A successful explanation restates the findings itself.
          const bool explained = std::any_of(steps.begin(), steps.end(), [](const StepOutcome& o) {
            return o.node == Node::ExplanationAgent && o.output;
          });
          if (!explained) sentences.push_back(bundle.insight->narrative);
        }
        break;
      case Node::ExplanationAgent:
        bundle.explanation = out.at("explanation").get<explain::Explanation>();
        sentences.push_back(bundle.explanation->text);
        break;
      case Node::Customizer: {
        add_chart(bundle, state, out);
        const auto* chart = state.find_chart(out.at("chart_id").get<std::string>());
        sentences.push_back(fmt::format("Updated chart \"{}\" (revision {}).",
                                        chart ? chart->title : out.at("chart_id").get<std::string>(),
                                        out.at("revision").get<int>()));
        break;
      }
      case Node::ResponseGenerator:
        break;
    }
  }
  if (sentences.empty()) sentences.push_back(kHelpMessage);
  for (const auto& s : sentences) {
    if (!bundle.message.empty()) bundle.message += ' ';
    bundle.message += s;
  }
  bundle.warnings = std::move(warnings);
  return bundle;
}

TurnResult run_turn(const ConversationState& state, const UserMessage& message, const WorkflowGraph& graph,
                    const providers::Providers& providers, const TurnOptions& options) {
  try {
    return run_turn_unchecked(state, message, graph, providers, options);
  } catch (const std::exception& e) {
    TurnResult result;
    result.state = state;
    result.bundle.message = fmt::format("Something went wrong while handling the request: {}.", e.what());
    result.bundle.errors.push_back({ErrorCode::Internal, e.what()});
    result.state.history.push_back({message, result.bundle});
    return result;
  }
}

TurnResult replay_trace(const ConversationState& state_before, const UserMessage& message,
                        const std::vector<TraceEvent>& recorded, const WorkflowGraph& graph,
                        const providers::Providers& providers, const TurnOptions& options) {
  auto result = run_turn_unchecked(state_before, message, graph, providers, options);
  const auto& fresh = result.trace;
  for (std::size_t i = 0; i < std::max(fresh.size(), recorded.size()); ++i) {
    if (i >= fresh.size()) throw Error(ErrorCode::DigestMismatch, "replay produced fewer events", recorded[i].node);
    if (i >= recorded.size()) throw Error(ErrorCode::DigestMismatch, "replay produced extra events", fresh[i].node);
    const auto& a = recorded[i];
    const auto& b = fresh[i];
    if (a.node != b.node) {
      throw Error(ErrorCode::DigestMismatch, fmt::format("expected node {}, replay ran {}", a.node, b.node), a.node);
    }
    if (a.input_digest != b.input_digest) throw Error(ErrorCode::DigestMismatch, "input digest differs", a.node);
    if (a.output_digest != b.output_digest || a.status != b.status) {
      throw Error(ErrorCode::DigestMismatch, "output digest differs", a.node);
    }
  }
  return result;
}

}  // namespace vizgen::workflow
