#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace shelfwise {

// Absolute instants are kept at microsecond resolution, UTC.
using Timestamp =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::microseconds>;

enum class TimeUnit { Seconds, Minutes, Hours, Days };

std::string_view to_string(TimeUnit unit);
TimeUnit parse_time_unit(std::string_view text);

// Length of one unit in microseconds.
std::int64_t unit_microseconds(TimeUnit unit);

// Duration expressed as a (fractional) number of `unit`.
double to_units(std::chrono::microseconds d, TimeUnit unit);

// Parses `text` against a strftime-style pattern (%Y %m %d %H %M %S and
// literals). A fractional-seconds suffix ".ffffff" after %S is accepted.
// Returns false when the text does not match the pattern completely.
bool parse_timestamp(std::string_view text, std::string_view format, Timestamp& out);

// ISO-8601 in UTC: "YYYY-MM-DDTHH:MM:SSZ", with a ".ffffff" fraction only
// when the instant is not on a whole second.
std::string format_iso8601(Timestamp t);
bool parse_iso8601(std::string_view text, Timestamp& out);

}  // namespace shelfwise
