#include "vizgen/providers/model.hpp"

#include "vizgen/error.hpp"

#include <array>
#include <fstream>
#include <future>
#include <thread>
#include <utility>

namespace vizgen::providers {
namespace {

constexpr std::array<std::pair<TaskTag, std::string_view>, 5> kTaskTags = {{
    {TaskTag::IntentRefine, "intent_refine"},
    {TaskTag::SqlGenerate, "sql_generate"},
    {TaskTag::InsightNarrate, "insight_narrate"},
    {TaskTag::ExplainSynthesize, "explain_synthesize"},
    {TaskTag::CustomizeParse, "customize_parse"},
}};

bool kind_matches(const Json& v, FieldKind kind) {
  switch (kind) {
    case FieldKind::String: return v.is_string();
    case FieldKind::Number: return v.is_number();
    case FieldKind::Boolean: return v.is_boolean();
    case FieldKind::Array: return v.is_array();
    case FieldKind::Object: return v.is_object();
  }
  return false;
}

Json call_with_deadline(const std::shared_ptr<ModelAdapter>& adapter, const StructuredPrompt& prompt,
                        std::chrono::milliseconds deadline) {
  // The worker owns copies of everything it touches so that an abandoned
  // call can finish after the caller has returned.
  auto task = std::make_shared<std::packaged_task<Json()>>(
      [adapter, prompt] { return adapter->complete(prompt); });
  auto result = task->get_future();
  std::thread([task] { (*task)(); }).detach();
  if (result.wait_for(deadline) != std::future_status::ready) {
    throw Error(ErrorCode::Timeout,
                "model call exceeded " + std::to_string(deadline.count()) + " ms",
                std::string(to_string(prompt.task_tag)));
  }
  return result.get();
}

}  // namespace

std::string_view to_string(TaskTag tag) {
  for (const auto& [k, v] : kTaskTags) {
    if (k == tag) return v;
  }
  return "intent_refine";
}

std::optional<TaskTag> task_tag_from_string(std::string_view name) {
  for (const auto& [k, v] : kTaskTags) {
    if (v == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::String: return "string";
    case FieldKind::Number: return "number";
    case FieldKind::Boolean: return "boolean";
    case FieldKind::Array: return "array";
    case FieldKind::Object: return "object";
  }
  return "string";
}

std::optional<std::string> schema_violation(const Json& value, const std::vector<FieldSpec>& schema) {
  if (!value.is_object()) return std::string("reply is not a JSON object");
  for (const auto& field : schema) {
    auto it = value.find(field.name);
    if (it == value.end() || it->is_null()) {
      if (field.required) return "missing required field '" + field.name + "'";
      continue;
    }
    if (!kind_matches(*it, field.kind)) {
      return "field '" + field.name + "' must be " + std::string(to_string(field.kind));
    }
  }
  return std::nullopt;
}

Json schema_to_json(const std::vector<FieldSpec>& schema) {
  Json out = Json::array();
  for (const auto& f : schema) {
    out.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"required", f.required}});
  }
  return out;
}

std::string fixture_key(const StructuredPrompt& prompt) {
  return sha256_hex(std::string(to_string(prompt.task_tag)) + ":" + sha256_hex(prompt.context));
}

Json NullModelAdapter::complete(const StructuredPrompt& prompt) {
  throw Error(ErrorCode::AdapterUnavailable, "model provider disabled",
              std::string(to_string(prompt.task_tag)));
}

Json FixtureModelAdapter::complete(const StructuredPrompt& prompt) {
  const auto path = dir_ / (fixture_key(prompt) + ".json");
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::AdapterUnavailable, "no model fixture " + path.filename().string(),
                std::string(to_string(prompt.task_tag)));
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("fixture is not JSON: ") + e.what());
  }
}

void FixtureModelAdapter::write_fixture(const std::filesystem::path& dir,
                                        const StructuredPrompt& prompt, const Json& reply) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / (fixture_key(prompt) + ".json"));
  out << reply.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write model fixture");
}

Json ScriptedModelAdapter::complete(const StructuredPrompt& prompt) {
  Step step;
  {
    std::lock_guard lock(mutex_);
    prompts_.push_back(prompt);
    const auto index = static_cast<std::size_t>(calls_.fetch_add(1));
    if (steps_.empty()) throw Error(ErrorCode::AdapterUnavailable, "empty script");
    step = steps_[std::min(index, steps_.size() - 1)];
  }
  if (const auto* fail = std::get_if<Fail>(&step)) {
    throw Error(ErrorCode::AdapterUnavailable, fail->message);
  }
  if (const auto* delay = std::get_if<Delay>(&step)) {
    std::this_thread::sleep_for(delay->duration);
    return delay->reply;
  }
  return std::get<Json>(step);
}

std::vector<StructuredPrompt> ScriptedModelAdapter::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

Completion invoke_with_repair(const StructuredPrompt& prompt,
                              const std::shared_ptr<ModelAdapter>& adapter, int max_retries,
                              std::chrono::milliseconds deadline) {
  if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
  if (prompt.output_schema.empty()) throw Error(ErrorCode::InvalidArgument, "empty output schema");
  if (!adapter || !adapter->enabled()) {
    throw Error(ErrorCode::AdapterUnavailable, "model provider disabled",
                std::string(to_string(prompt.task_tag)));
  }
  StructuredPrompt attempt = prompt;
  std::string last_violation;
  for (int i = 0; i <= max_retries; ++i) {
    std::optional<std::string> violation;
    Json reply;
    try {
      reply = call_with_deadline(adapter, attempt, deadline);
      violation = schema_violation(reply, prompt.output_schema);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SchemaViolation) throw;
      violation = e.message();
    }
    if (!violation) return {std::move(reply), i + 1};
    last_violation = *violation;
    attempt.context = prompt.context + "\nPrevious reply was invalid: " + last_violation;
  }
  throw Error(ErrorCode::SchemaViolation,
              "no valid reply after " + std::to_string(max_retries + 1) + " attempts: " +
                  last_violation,
              std::string(to_string(prompt.task_tag)));
}

Completion complete_structured(const StructuredPrompt& prompt,
                               const std::shared_ptr<ModelAdapter>& adapter,
                               std::chrono::milliseconds deadline) {
  return invoke_with_repair(prompt, adapter, kDefaultMaxRetries, deadline);
}

}  // namespace vizgen::providers
