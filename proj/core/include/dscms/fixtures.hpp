#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/ingestion.hpp"
#include "dscms/observation.hpp"
#include "dscms/result.hpp"
#include "dscms/spi_catalog.hpp"
#include "dscms/time.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/// Data compiled into the library: the cyber-inability case, its indicator
/// catalog (one file per claim group), replayable scenarios and recovery
/// examples.
namespace dscms::fixtures {

/// Raw bytes of a bundled file such as `case/cyber_inability.json`.
[[nodiscard]] std::optional<std::string_view> file(std::string_view relative_path);
/// Bundled paths starting with `prefix`, sorted.
[[nodiscard]] std::vector<std::string> list(std::string_view prefix);

[[nodiscard]] Result<SafetyCase> cyber_case();
/// Catalog documents in path order.
[[nodiscard]] std::vector<std::string> catalog_documents();
[[nodiscard]] Result<SpiCatalog> cyber_catalog(Timestamp loaded_at);

struct Scenario {
    std::string name;
    std::string title;
    Timestamp trigger{};
    std::vector<Observation> observations;
};

[[nodiscard]] std::vector<std::string> scenario_names();
[[nodiscard]] Result<Scenario> scenario(std::string_view name);

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_table();
}

}  // namespace dscms::fixtures
