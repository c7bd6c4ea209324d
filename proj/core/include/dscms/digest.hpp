#pragma once

#include <string>
#include <string_view>

namespace dscms {

/// Name recorded alongside every digest this library produces.
inline constexpr std::string_view kDigestAlgorithm = "sha256";

/// Returns `sha256:<64 lowercase hex chars>`.
[[nodiscard]] std::string content_digest(std::string_view bytes);

}  // namespace dscms
