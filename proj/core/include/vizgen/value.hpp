#pragma once

#include "vizgen/json_util.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace vizgen {

// A single result cell. Temporal values travel as ISO-8601 strings.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

std::optional<double> as_number(const Value& v);
// Shortest round-trip text for numbers; "null" for null.
std::string display(const Value& v);

// Total order: null < numbers (by value) < strings (bytewise).
bool value_less(const Value& a, const Value& b);

Json value_to_json(const Value& v);
Value value_from_json(const Json& j);

}  // namespace vizgen
