#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace vizgen {

using Json = nlohmann::json;

// Canonical text form: keys sorted (nlohmann's default object is ordered by
// key), no whitespace, shortest round-trip doubles. Digests and replay depend
// on this being byte-stable.
std::string canonical(const Json& value);

std::string sha256_hex(std::string_view bytes);

// sha256 of canonical(value).
std::string digest(const Json& value);

// Short digest prefix used for opaque ids.
std::string short_digest(const Json& value, std::size_t hex_chars = 16);

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

}  // namespace vizgen
