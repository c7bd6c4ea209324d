#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dscms {

/// UTC instant with one-second resolution.
using Timestamp = std::chrono::sys_seconds;

/// Parses an ISO-8601 date-time such as `2025-03-01T00:00:00Z` or
/// `2025-03-01T02:00:00+02:00`. A fractional-seconds part is accepted and
/// truncated. Returns nullopt on any syntax or range error.
[[nodiscard]] std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
[[nodiscard]] std::string format_timestamp(Timestamp ts);

[[nodiscard]] inline Timestamp days_before(Timestamp ts, long days) {
    return ts - std::chrono::days{days};
}

/// Whole seconds since the epoch of the system clock, truncated.
[[nodiscard]] Timestamp now_utc();

}  // namespace dscms
