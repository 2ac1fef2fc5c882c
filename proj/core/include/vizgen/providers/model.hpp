#pragma once

#include "vizgen/json_util.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vizgen::providers {

enum class TaskTag { IntentRefine, SqlGenerate, InsightNarrate, ExplainSynthesize, CustomizeParse };

std::string_view to_string(TaskTag tag);
std::optional<TaskTag> task_tag_from_string(std::string_view name);

enum class FieldKind { String, Number, Boolean, Array, Object };

std::string_view to_string(FieldKind kind);

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::String;
  bool required = true;
};

struct StructuredPrompt {
  TaskTag task_tag = TaskTag::IntentRefine;
  std::string context;
  std::vector<FieldSpec> output_schema;  // non-empty
};

// nullopt when `value` is an object satisfying every field spec; otherwise a
// one-line description of the first violation.
std::optional<std::string> schema_violation(const Json& value, const std::vector<FieldSpec>& schema);

Json schema_to_json(const std::vector<FieldSpec>& schema);

// sha256(task_tag ":" sha256(context)); stub fixtures are named <key>.json.
std::string fixture_key(const StructuredPrompt& prompt);

// Returns the raw reply, which may violate the schema. Throws
// AdapterUnavailable, or SchemaViolation for replies that are not JSON.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;
  virtual bool enabled() const { return true; }
  virtual Json complete(const StructuredPrompt& prompt) = 0;
};

// The disabled provider: every agent uses its deterministic path.
class NullModelAdapter final : public ModelAdapter {
 public:
  bool enabled() const override { return false; }
  Json complete(const StructuredPrompt& prompt) override;
};

// Serves <dir>/<fixture_key>.json verbatim; a missing fixture is
// AdapterUnavailable.
class FixtureModelAdapter final : public ModelAdapter {
 public:
  explicit FixtureModelAdapter(std::filesystem::path dir) : dir_(std::move(dir)) {}
  Json complete(const StructuredPrompt& prompt) override;

  static void write_fixture(const std::filesystem::path& dir, const StructuredPrompt& prompt,
                            const Json& reply);

 private:
  std::filesystem::path dir_;
};

// Replays a fixed sequence of replies; the last one repeats.
class ScriptedModelAdapter final : public ModelAdapter {
 public:
  struct Fail {
    std::string message;
  };
  struct Delay {
    std::chrono::milliseconds duration;
    Json reply;
  };
  using Step = std::variant<Json, Fail, Delay>;

  explicit ScriptedModelAdapter(std::vector<Step> steps) : steps_(std::move(steps)) {}
  Json complete(const StructuredPrompt& prompt) override;

  int calls() const { return calls_.load(); }
  std::vector<StructuredPrompt> prompts() const;

 private:
  std::vector<Step> steps_;
  std::atomic<int> calls_{0};
  mutable std::mutex mutex_;
  std::vector<StructuredPrompt> prompts_;
};

// POSTs {task_tag, context, output_schema} to the endpoint and expects the
// structured value as the JSON response body.
class HttpModelAdapter final : public ModelAdapter {
 public:
  HttpModelAdapter(std::string endpoint, std::string key);
  Json complete(const StructuredPrompt& prompt) override;

 private:
  std::string endpoint_;
  std::string key_;
};

inline constexpr int kDefaultMaxRetries = 2;
inline constexpr std::chrono::milliseconds kDefaultDeadline{30'000};

struct Completion {
  Json value;
  int attempts = 1;  // 1 + repair retries used
};

// Reissues the prompt with the violation appended to its context, at most
// max_retries times. Each attempt gets its own deadline. Throws
// SchemaViolation on exhaustion, Timeout, AdapterUnavailable.
Completion invoke_with_repair(const StructuredPrompt& prompt,
                              const std::shared_ptr<ModelAdapter>& adapter,
                              int max_retries = kDefaultMaxRetries,
                              std::chrono::milliseconds deadline = kDefaultDeadline);

// Filled in by agents that consult the model so callers can surface retry
// accounting and fallbacks in the trace.
struct ModelUsage {
  int attempts = 0;
  std::optional<std::string> failure;  // "Code: message" of a failed call
};

Completion complete_structured(const StructuredPrompt& prompt,
                               const std::shared_ptr<ModelAdapter>& adapter,
                               std::chrono::milliseconds deadline = kDefaultDeadline);

}  // namespace vizgen::providers
