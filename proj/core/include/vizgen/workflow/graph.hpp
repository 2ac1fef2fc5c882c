#pragma once

#include "vizgen/intent/classifier.hpp"
#include "vizgen/workflow/state.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::workflow {

// Declaration order is execution order.
enum class Node {
  System,
  SqlAgent,
  VisualizationAgent,
  AnalysisAgent,
  ExplanationAgent,
  Customizer,
  ResponseGenerator,
};

inline constexpr Node kAllNodes[] = {Node::System,           Node::SqlAgent,
                                     Node::VisualizationAgent, Node::AnalysisAgent,
                                     Node::ExplanationAgent,   Node::Customizer,
                                     Node::ResponseGenerator};

std::string_view to_string(Node node);
std::optional<Node> node_from_string(std::string_view name);

// Nodes whose success `node` needs when both are in the same plan.
std::vector<Node> dependencies(Node node);

struct ExecutionPlan {
  std::vector<Node> steps;  // ends with ResponseGenerator, no duplicates

  bool contains(Node node) const;
  // Throws InvalidArgument on a malformed plan.
  void check_invariants() const;
  bool operator==(const ExecutionPlan&) const = default;
};

// True when the text names a schema column the last result does not carry,
// or there is no last result at all.
bool is_new_data_request(const ConversationState& state, std::string_view text);

// Total over intent sets: every set, including the empty one, yields a plan.
ExecutionPlan route(const intent::IntentSet& intents, const ConversationState& state,
                    std::string_view text = {});

struct TurnContext;

// A node reads and updates the working state and returns a JSON summary of
// its output. Failures are reported by throwing vizgen::Error.
using NodeHandler = std::function<Json(TurnContext&)>;
using NodeRegistry = std::map<Node, NodeHandler>;

class WorkflowGraph {
 public:
  const NodeHandler& handler(Node node) const;
  // Stable across compiles of the same topology.
  const std::string& topology_digest() const { return topology_digest_; }

 private:
  friend WorkflowGraph compile_workflow(NodeRegistry registry);
  NodeRegistry handlers_;
  std::string topology_digest_;
};

// Every node except ResponseGenerator needs a handler. Throws MissingNode.
WorkflowGraph compile_workflow(NodeRegistry registry);

}  // namespace vizgen::workflow
