#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sbsim {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr Timestamp kStepSeconds = 300;

/// Parses "YYYY-MM-DDTHH:MM:SS" with optional fractional seconds of zero,
/// a trailing 'Z', or a "+HH:MM"/"-HH:MM" offset. A space may replace 'T'.
/// Throws sbsim::Error(DataError) on malformed input.
Timestamp parse_iso8601(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(Timestamp ts);

inline bool on_step_lattice(Timestamp ts) { return ((ts % kStepSeconds) + kStepSeconds) % kStepSeconds == 0; }

}  // namespace sbsim
