#include "vizgen/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace vizgen {
namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc{};
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()),
                static_cast<int>(tod.subseconds().count()));
  return buf;
}

std::optional<double> parse_iso8601_days(std::string_view text) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  double result = static_cast<double>(sys_days{ymd}.time_since_epoch().count());
  if (text.size() == 10) return result;

  std::size_t pos = 10;
  if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
  ++pos;
  int hh = 0, mm = 0;
  double ss = 0.0;
  if (!read_int(text, pos, 2, hh) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
      !read_int(text, pos + 3, 2, mm)) {
    return std::nullopt;
  }
  pos += 5;
  if (pos < text.size() && text[pos] == ':') {
    int whole = 0;
    if (!read_int(text, pos + 1, 2, whole)) return std::nullopt;
    ss = whole;
    pos += 3;
    if (pos < text.size() && text[pos] == '.') {
      std::size_t end = pos + 1;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      if (end == pos + 1) return std::nullopt;
      double frac = 0.0;
      double scale = 0.1;
      for (std::size_t i = pos + 1; i < end; ++i, scale /= 10) frac += (text[i] - '0') * scale;
      ss += frac;
      pos = end;
    }
  }
  if (hh > 23 || mm > 59 || ss >= 61.0) return std::nullopt;
  double offset_minutes = 0.0;
  if (pos < text.size()) {
    if (text[pos] == 'Z' && pos + 1 == text.size()) {
      pos += 1;
    } else if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() &&
               text[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om)) {
        return std::nullopt;
      }
      offset_minutes = (text[pos] == '+' ? 1 : -1) * (oh * 60.0 + om);
      pos += 6;
    } else {
      return std::nullopt;
    }
  }
  result += (hh * 3600.0 + mm * 60.0 + ss - offset_minutes * 60.0) / 86400.0;
  return result;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  auto days_since = parse_iso8601_days(text);
  if (!days_since) return std::nullopt;
  const auto ms = static_cast<long long>(*days_since * 86400000.0 + (*days_since >= 0 ? 0.5 : -0.5));
  return Timestamp{std::chrono::milliseconds{ms}};
}

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now());
}

std::shared_ptr<Clock> system_clock() {
  static const auto clock = std::make_shared<SystemClock>();
  return clock;
}

}  // namespace vizgen
