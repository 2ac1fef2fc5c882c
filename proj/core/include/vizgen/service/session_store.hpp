#pragma once

#include "vizgen/time.hpp"
#include "vizgen/workflow/state.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vizgen::service {

struct SessionRecord {
  std::string session_id;
  Timestamp created_at{};
  workflow::ConversationState state;
  std::int64_t revision = 0;  // strictly increases with every save

  bool operator==(const SessionRecord&) const = default;
};

void to_json(Json& j, const SessionRecord& r);
void from_json(const Json& j, SessionRecord& r);

// 32 lowercase hex characters.
bool is_valid_session_id(std::string_view id);

// One canonical JSON document per session, written to a temporary file and
// renamed into place so a reader never sees a partial document.
class SessionStore {
 public:
  // Throws StorageFailure when the directory cannot be created.
  explicit SessionStore(std::filesystem::path dir);

  // Throws StorageFailure.
  SessionRecord create(Timestamp now);
  // Throws UnknownSession, StorageFailure.
  SessionRecord load(std::string_view session_id) const;
  // Bumps record.revision, then writes. Throws StorageFailure.
  void save(SessionRecord& record);

  bool exists(std::string_view session_id) const;
  std::vector<std::string> list() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(std::string_view session_id) const;
  std::filesystem::path dir_;
};

}  // namespace vizgen::service
