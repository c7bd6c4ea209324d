#pragma once

#include <nlohmann/json.hpp>

namespace dscms {

/// Document type used for every file and wire format. Insertion-ordered so
/// that serialized output has a stable field order.
using Json = nlohmann::ordered_json;

}  // namespace dscms
