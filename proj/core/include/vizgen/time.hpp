#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace vizgen {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// "2024-03-01T12:00:00.000Z"
std::string format_timestamp(Timestamp t);
// Accepts the output of format_timestamp plus the ISO-8601 subset handled by
// parse_iso8601_days.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Parses YYYY-MM-DD with an optional time part ("T" or space separated,
// HH:MM[:SS[.fff]] and an optional Z/+HH:MM offset). Returns fractional days
// since 1970-01-01 UTC.
std::optional<double> parse_iso8601_days(std::string_view text);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

// Always reports the same instant. Makes durations zero and turn output a
// pure function of its inputs.
class FixedClock final : public Clock {
 public:
  explicit FixedClock(Timestamp at) : at_(at) {}
  Timestamp now() const override { return at_; }

 private:
  Timestamp at_;
};

std::shared_ptr<Clock> system_clock();

}  // namespace vizgen
