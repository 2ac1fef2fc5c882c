#include "vizgen/workflow/graph.hpp"

#include "vizgen/sql/schema.hpp"

#include <algorithm>
#include <set>

namespace vizgen::workflow {

using intent::Intent;

std::string_view to_string(Node node) {
  switch (node) {
    case Node::System: return "System";
    case Node::SqlAgent: return "SqlAgent";
    case Node::VisualizationAgent: return "VisualizationAgent";
    case Node::AnalysisAgent: return "AnalysisAgent";
    case Node::ExplanationAgent: return "ExplanationAgent";
    case Node::Customizer: return "Customizer";
    case Node::ResponseGenerator: return "ResponseGenerator";
  }
  return "?";
}

std::optional<Node> node_from_string(std::string_view name) {
  for (Node n : kAllNodes) {
    if (to_string(n) == name) return n;
  }
  return std::nullopt;
}

std::vector<Node> dependencies(Node node) {
  switch (node) {
    case Node::SqlAgent: return {Node::System};
    case Node::VisualizationAgent:
    case Node::AnalysisAgent: return {Node::SqlAgent};
    case Node::ExplanationAgent: return {Node::AnalysisAgent};
    case Node::Customizer: return {Node::VisualizationAgent};
    default: return {};
  }
}

bool ExecutionPlan::contains(Node node) const {
  return std::find(steps.begin(), steps.end(), node) != steps.end();
}

void ExecutionPlan::check_invariants() const {
  if (steps.empty() || steps.back() != Node::ResponseGenerator) {
    throw Error(ErrorCode::InvalidArgument, "plan must end with ResponseGenerator");
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (static_cast<int>(steps[i - 1]) >= static_cast<int>(steps[i])) {
      throw Error(ErrorCode::InvalidArgument, "plan steps out of order or repeated",
                  std::string(to_string(steps[i])));
    }
  }
}

bool is_new_data_request(const ConversationState& state, std::string_view text) {
  if (!state.last_table) return true;
  if (!state.schema_cache) return false;
  const auto words = intent::tokenize(text);
  const std::set<std::string> mentioned(words.begin(), words.end());
  std::set<std::string> present;
  for (const auto& c : state.last_table->columns) {
    for (auto& t : intent::tokenize(c.name)) present.insert(std::move(t));
  }
  for (const auto& table : state.schema_cache->tables) {
    for (const auto& col : table.columns) {
      const auto lowered = sql::to_lower(col.name);
      if (mentioned.count(lowered) && !present.count(lowered)) return true;
    }
  }
  return false;
}

ExecutionPlan route(const intent::IntentSet& intents, const ConversationState& state,
                    std::string_view text) {
  std::set<Node> nodes;
  if (intents.contains(Intent::System)) nodes.insert(Node::System);
  if (intents.contains(Intent::Visualization)) {
    nodes.insert(Node::SqlAgent);
    nodes.insert(Node::VisualizationAgent);
  }
  if (intents.contains(Intent::Insight)) {
    nodes.insert(Node::AnalysisAgent);
    if (is_new_data_request(state, text)) nodes.insert(Node::SqlAgent);
  }
  if (intents.contains(Intent::Explanation)) {
    nodes.insert(Node::ExplanationAgent);
    if (state.insights.empty()) {
      nodes.insert(Node::SqlAgent);
      nodes.insert(Node::AnalysisAgent);
    }
    // Fresh rows in this turn are what the explanation is about.
    if (nodes.count(Node::SqlAgent)) nodes.insert(Node::AnalysisAgent);
  }
  if (intents.contains(Intent::Customization)) nodes.insert(Node::Customizer);
  nodes.insert(Node::ResponseGenerator);
  ExecutionPlan plan;
  for (Node n : kAllNodes) {
    if (nodes.count(n)) plan.steps.push_back(n);
  }
  return plan;
}

const NodeHandler& WorkflowGraph::handler(Node node) const {
  auto it = handlers_.find(node);
  if (it == handlers_.end()) throw Error(ErrorCode::MissingNode, "no handler", std::string(to_string(node)));
  return it->second;
}

WorkflowGraph compile_workflow(NodeRegistry registry) {
  Json topology = Json::array();
  for (Node n : kAllNodes) {
    if (n == Node::ResponseGenerator) continue;
    auto it = registry.find(n);
    if (it == registry.end() || !it->second) {
      throw Error(ErrorCode::MissingNode, "workflow node has no handler", std::string(to_string(n)));
    }
    Json deps = Json::array();
    for (Node d : dependencies(n)) deps.push_back(to_string(d));
    topology.push_back({{"node", to_string(n)}, {"after", std::move(deps)}});
  }
  topology.push_back({{"node", to_string(Node::ResponseGenerator)}, {"after", Json::array()}});
  WorkflowGraph graph;
  graph.handlers_ = std::move(registry);
  graph.topology_digest_ = digest(topology);
  return graph;
}

}  // namespace vizgen::workflow
