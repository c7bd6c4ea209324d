#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/json.hpp"
#include "dscms/observation.hpp"
#include "dscms/result.hpp"
#include "dscms/spi_catalog.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dscms {

struct LineError {
    std::size_t line = 0;  ///< 1-based
    std::string code;
    std::string message;

    friend bool operator==(const LineError&, const LineError&) = default;
};

struct ParsedObservations {
    std::vector<Observation> observations;
    std::vector<LineError> errors;
};

/// Parses line-delimited observation records. Bad lines are reported and
/// skipped; blank lines are ignored.
[[nodiscard]] ParsedObservations parse_observations(std::string_view text);

/// Parses a single observation record.
[[nodiscard]] Result<Observation> observation_from_json(const Json& record);

/// Serializes observations one record per line.
[[nodiscard]] std::string format_observations(std::span<const Observation> observations);

/// Routes raw feed records onto an indicator.
struct FeedMapping {
    EvidenceSource source = EvidenceSource::incidents;
    /// Field values a record must carry, compared as text.
    std::map<std::string, std::string> match;
    std::string target_spi;
    /// Field holding the observation value; absent means each match counts 1.
    std::optional<std::string> value_field;

    [[nodiscard]] bool matches(const Json& record) const;
};

[[nodiscard]] Result<std::vector<FeedMapping>> parse_feed_mappings(std::string_view document);
/// Reports `unknown-target-spi` for mappings naming indicators outside the catalog.
[[nodiscard]] std::vector<Violation> validate_mappings(std::span<const FeedMapping> mappings,
                                                      const SpiCatalog& catalog);

struct FeedResult {
    std::vector<Observation> observations;
    /// Indices of records no mapping matched.
    std::vector<std::size_t> unmatched;
    /// Records that matched but could not be converted (missing time or value).
    std::vector<LineError> errors;
};

[[nodiscard]] FeedResult map_feed(std::span<const Json> records, std::span<const FeedMapping> mappings);

struct IngestReceipt {
    std::size_t accepted = 0;
    std::size_t deduplicated = 0;
    bool evaluation_trigger = false;

    friend bool operator==(const IngestReceipt&, const IngestReceipt&) = default;
};

IngestReceipt ingest(ObservationStore& store, std::span<const Observation> observations);

}  // namespace dscms
