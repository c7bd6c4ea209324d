#pragma once

#include "dscms/json.hpp"
#include "dscms/time.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dscms {

enum class EvidenceSource {
    incidents,
    near_misses,
    cyber_threat_intelligence,
    research_insights,
    industry_bodies,
    internal_evaluations,
    scaling_laws,
    external_evaluations,
};

[[nodiscard]] std::string_view to_string(EvidenceSource source);
/// Accepts the hyphenated wire names (`cyber-threat-intelligence`).
[[nodiscard]] std::optional<EvidenceSource> parse_evidence_source(std::string_view text);

/// One timestamped datum for one indicator.
struct Observation {
    std::string spi;
    Timestamp ts{};
    double value = 0.0;
    EvidenceSource source = EvidenceSource::incidents;
    std::map<std::string, std::string> meta;

    friend bool operator==(const Observation&, const Observation&) = default;
};

[[nodiscard]] Json to_json(const Observation& obs);

/// Orders observations of a single indicator. Two observations comparing
/// equal under this ordering are duplicates: same time, value and meta.
struct ObservationOrder {
    [[nodiscard]] bool operator()(const Observation& a, const Observation& b) const;
};

/// Append-only, deduplicating, time-indexed store keyed by indicator id.
class ObservationStore {
public:
    /// Returns true if the observation was new.
    bool add(Observation obs);

    /// Observations for one indicator in ascending time order.
    [[nodiscard]] std::vector<Observation> for_spi(std::string_view spi) const;
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
    [[nodiscard]] std::vector<std::string> spis() const;
    /// Every observation, grouped by indicator id then time.
    [[nodiscard]] std::vector<Observation> all() const;

    friend bool operator==(const ObservationStore&, const ObservationStore&) = default;

private:
    std::map<std::string, std::set<Observation, ObservationOrder>, std::less<>> by_spi_;
    std::size_t size_ = 0;
};

}  // namespace dscms
