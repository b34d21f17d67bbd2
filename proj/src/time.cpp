#include "shelfwise/time.hpp"

#include <cctype>
#include <cstdio>

#include "shelfwise/error.hpp"

namespace shelfwise {

namespace {

using std::chrono::microseconds;

// Reads exactly `width` digits (or 1..width digits when `exact` is false).
bool read_int(std::string_view text, std::size_t& pos, int width, bool exact, int& out) {
  int value = 0;
  int n = 0;
  while (n < width && pos < text.size() &&
         std::isdigit(static_cast<unsigned char>(text[pos]))) {
    value = value * 10 + (text[pos] - '0');
    ++pos;
    ++n;
  }
  if (n == 0 || (exact && n != width)) return false;
  out = value;
  return true;
}

bool read_fraction(std::string_view text, std::size_t& pos, std::int64_t& micros) {
  if (pos >= text.size() || text[pos] != '.') return true;
  std::size_t p = pos + 1;
  std::int64_t value = 0;
  int digits = 0;
  while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) {
    if (digits < 6) {
      value = value * 10 + (text[p] - '0');
      ++digits;
    }
    ++p;
  }
  if (p == pos + 1) return false;
  while (digits < 6) {
    value *= 10;
    ++digits;
  }
  micros = value;
  pos = p;
  return true;
}

struct Fields {
  int year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0;
  std::int64_t micros = 0;
};

bool assemble(const Fields& f, Timestamp& out) {
  using namespace std::chrono;
  const year_month_day ymd{year{f.year}, month{static_cast<unsigned>(f.month)},
                           day{static_cast<unsigned>(f.day)}};
  if (!ymd.ok()) return false;
  if (f.hour > 23 || f.minute > 59 || f.second > 59) return false;
  const sys_days days{ymd};
  out = Timestamp{duration_cast<microseconds>(days.time_since_epoch()) + hours{f.hour} +
                  minutes{f.minute} + seconds{f.second} + microseconds{f.micros}};
  return true;
}

bool match_at(std::string_view text, std::size_t& pos, std::string_view format, Fields& f) {
  for (std::size_t i = 0; i < format.size(); ++i) {
    const char c = format[i];
    if (c != '%') {
      if (pos >= text.size() || text[pos] != c) return false;
      ++pos;
      continue;
    }
    if (++i >= format.size()) return false;
    switch (format[i]) {
      case 'Y':
        if (!read_int(text, pos, 4, true, f.year)) return false;
        break;
      case 'm':
        if (!read_int(text, pos, 2, false, f.month)) return false;
        break;
      case 'd':
        if (!read_int(text, pos, 2, false, f.day)) return false;
        break;
      case 'H':
        if (!read_int(text, pos, 2, false, f.hour)) return false;
        break;
      case 'M':
        if (!read_int(text, pos, 2, false, f.minute)) return false;
        break;
      case 'S':
        if (!read_int(text, pos, 2, false, f.second)) return false;
        if (!read_fraction(text, pos, f.micros)) return false;
        break;
      case 'F':
        if (!match_at(text, pos, "%Y-%m-%d", f)) return false;
        break;
      case 'T':
        if (!match_at(text, pos, "%H:%M:%S", f)) return false;
        break;
      case '%':
        if (pos >= text.size() || text[pos] != '%') return false;
        ++pos;
        break;
      default:
        throw Error(ErrorCode::InvalidArgument,
                    std::string("unsupported timestamp directive %") + format[i]);
    }
  }
  return true;
}

bool match(std::string_view text, std::string_view format, Fields& f) {
  f = Fields{};
  std::size_t pos = 0;
  return match_at(text, pos, format, f) && pos == text.size();
}

}  // namespace

std::string_view to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds: return "seconds";
    case TimeUnit::Minutes: return "minutes";
    case TimeUnit::Hours: return "hours";
    case TimeUnit::Days: return "days";
  }
  return "hours";
}

TimeUnit parse_time_unit(std::string_view text) {
  if (text == "seconds" || text == "s") return TimeUnit::Seconds;
  if (text == "minutes" || text == "min") return TimeUnit::Minutes;
  if (text == "hours" || text == "h") return TimeUnit::Hours;
  if (text == "days" || text == "d") return TimeUnit::Days;
  throw Error(ErrorCode::InvalidArgument, "unknown time unit '" + std::string(text) + "'");
}

std::int64_t unit_microseconds(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds: return 1'000'000;
    case TimeUnit::Minutes: return 60'000'000;
    case TimeUnit::Hours: return 3'600'000'000;
    case TimeUnit::Days: return 86'400'000'000;
  }
  return 3'600'000'000;
}

double to_units(std::chrono::microseconds d, TimeUnit unit) {
  return static_cast<double>(d.count()) / static_cast<double>(unit_microseconds(unit));
}

bool parse_timestamp(std::string_view text, std::string_view format, Timestamp& out) {
  Fields f;
  if (!match(text, format, f)) return false;
  return assemble(f, out);
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  auto rest = t - days;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto m = duration_cast<minutes>(rest);
  rest -= m;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  char buf[48];
  if (rest.count() == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(s.count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06dZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(m.count()), static_cast<int>(s.count()),
                  static_cast<int>(rest.count()));
  }
  return buf;
}

bool parse_iso8601(std::string_view text, Timestamp& out) {
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  Fields f;
  if (match(text, "%Y-%m-%dT%H:%M:%S", f) || match(text, "%Y-%m-%d %H:%M:%S", f)) {
    return assemble(f, out);
  }
  return false;
}

}  // namespace shelfwise
