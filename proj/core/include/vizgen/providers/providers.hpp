#pragma once

#include "vizgen/providers/model.hpp"
#include "vizgen/providers/search.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>

namespace vizgen::providers {

// The external dependencies a turn may call. One model slot per task tag,
// defaulting to `model`.
struct Providers {
  std::shared_ptr<ModelAdapter> model = std::make_shared<NullModelAdapter>();
  std::map<TaskTag, std::shared_ptr<ModelAdapter>> model_by_task;
  std::shared_ptr<SearchAdapter> search = std::make_shared<NullSearchAdapter>();
  std::chrono::milliseconds deadline = kDefaultDeadline;
  int max_retries = kDefaultMaxRetries;

  const std::shared_ptr<ModelAdapter>& model_for(TaskTag tag) const;

  // Both providers disabled.
  static Providers offline();
  // Fixture-backed stubs; an absent directory leaves that provider disabled.
  static Providers from_fixtures(const std::optional<std::filesystem::path>& model_dir,
                                 const std::optional<std::filesystem::path>& search_dir);
  // MODEL_ENDPOINT/MODEL_KEY and SEARCH_ENDPOINT/SEARCH_KEY select live
  // adapters; unset variables leave that provider disabled.
  static Providers from_env();
};

// Runs invoke_with_repair with the providers' deadline and retry budget and
// records the outcome in `usage` when given. Rethrows failures.
Completion complete(const Providers& providers, const StructuredPrompt& prompt,
                    ModelUsage* usage = nullptr);

}  // namespace vizgen::providers
