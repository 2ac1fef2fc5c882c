#include "vizgen/service/session_store.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vizgen::service {
namespace {

namespace fs = std::filesystem;

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) {
    throw Error(ErrorCode::StorageFailure, "random source unavailable");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : buf) {
    out += kHex[b >> 4];
    out += kHex[b & 0xf];
  }
  return out;
}

void write_atomically(const fs::path& target, const std::string& content) {
  const auto temp = target.parent_path() / (target.filename().string() + ".tmp-" + random_hex(4));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write session file", target.filename().string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(temp, ignored);
      throw Error(ErrorCode::StorageFailure, "short write", target.filename().string());
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw Error(ErrorCode::StorageFailure, "cannot replace session file", target.filename().string());
  }
}

}  // namespace

void to_json(Json& j, const SessionRecord& r) {
  j = Json{{"session_id", r.session_id},
           {"created_at", format_timestamp(r.created_at)},
           {"state", r.state},
           {"revision", r.revision}};
}

void from_json(const Json& j, SessionRecord& r) {
  r.session_id = j.at("session_id").get<std::string>();
  const auto created = parse_timestamp(j.at("created_at").get<std::string>());
  if (!created) throw Error(ErrorCode::StorageFailure, "bad created_at", r.session_id);
  r.created_at = *created;
  r.state = j.at("state").get<workflow::ConversationState>();
  r.revision = j.at("revision").get<std::int64_t>();
}

bool is_valid_session_id(std::string_view id) {
  return id.size() == 32 &&
         std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw Error(ErrorCode::StorageFailure, "cannot create state directory", dir_.string());
}

fs::path SessionStore::path_for(std::string_view session_id) const {
  return dir_ / (std::string(session_id) + ".json");
}

SessionRecord SessionStore::create(Timestamp now) {
  SessionRecord record;
  do {
    record.session_id = random_hex(16);
  } while (exists(record.session_id));
  record.created_at = now;
  record.state.session_id = record.session_id;
  save(record);
  return record;
}

SessionRecord SessionStore::load(std::string_view session_id) const {
  if (!is_valid_session_id(session_id) || !exists(session_id)) {
    throw Error(ErrorCode::UnknownSession, "no such session", std::string(session_id));
  }
  std::ifstream in(path_for(session_id), std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read session file", std::string(session_id));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str()).get<SessionRecord>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::StorageFailure, std::string("corrupt session file: ") + e.what(), std::string(session_id));
  }
}

void SessionStore::save(SessionRecord& record) {
  if (!is_valid_session_id(record.session_id)) {
    throw Error(ErrorCode::StorageFailure, "invalid session id", record.session_id);
  }
  SessionRecord next = record;
  ++next.revision;
  write_atomically(path_for(next.session_id), canonical(Json(next)));
  record = std::move(next);
}

bool SessionStore::exists(std::string_view session_id) const {
  std::error_code ec;
  return is_valid_session_id(session_id) && fs::is_regular_file(path_for(session_id), ec);
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (entry.path().extension() != ".json") continue;
    auto stem = entry.path().stem().string();
    if (is_valid_session_id(stem)) ids.push_back(std::move(stem));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace vizgen::service
