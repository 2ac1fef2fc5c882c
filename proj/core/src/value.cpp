#include "vizgen/value.hpp"

#include <fmt/format.h>

namespace vizgen {

std::optional<double> as_number(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::string display(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "null";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, double>) {
          return fmt::format("{}", x);
        } else {
          return std::to_string(x);
        }
      },
      v);
}

bool value_less(const Value& a, const Value& b) {
  auto rank = [](const Value& v) {
    if (is_null(v)) return 0;
    if (std::holds_alternative<std::string>(v)) return 2;
    return 1;
  };
  const int ra = rank(a);
  const int rb = rank(b);
  if (ra != rb) return ra < rb;
  if (ra == 1) return *as_number(a) < *as_number(b);
  if (ra == 2) return std::get<std::string>(a) < std::get<std::string>(b);
  return false;
}

Json value_to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return x;
        }
      },
      v);
}

Value value_from_json(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return std::monostate{};
    case Json::value_t::number_integer:
      return j.get<std::int64_t>();
    case Json::value_t::number_unsigned:
      return static_cast<std::int64_t>(j.get<std::uint64_t>());
    case Json::value_t::number_float:
      return j.get<double>();
    case Json::value_t::string:
      return j.get<std::string>();
    case Json::value_t::boolean:
      return static_cast<std::int64_t>(j.get<bool>() ? 1 : 0);
    default:
      return j.dump();
  }
}

}  // namespace vizgen
