#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/consistency.hpp"
#include "dscms/spi_catalog.hpp"

#include <map>
#include <set>
#include <span>
#include <string>

namespace dscms::oracle {

struct Fixpoint {
    std::set<std::string> invalidated;
    std::set<std::string> under_review;
};

/// Order-free reference semantics: sweep every edge against the current
/// status map and repeat until a full sweep changes nothing.
[[nodiscard]] Fixpoint exhaustive_fixpoint(const SafetyCase& safety_case, const std::set<std::string>& direct,
                                           std::span<const SpiStatus> statuses);

/// Differences between the engine and the oracle over the affected nodes
/// (invalidated or under review).
struct Comparison {
    /// Affected according to the oracle but untouched by the engine.
    std::set<std::string> false_negatives;
    /// Affected according to the engine but untouched by the oracle.
    std::set<std::string> false_positives;
    /// Affected in both, with different resulting status.
    std::set<std::string> status_mismatches;

    [[nodiscard]] bool agrees() const {
        return false_negatives.empty() && false_positives.empty() && status_mismatches.empty();
    }
};

/// Runs direct_impact and the engine's propagate, then diffs against the
/// exhaustive fixpoint. Returns errors from direct_impact unchanged.
[[nodiscard]] Result<Comparison> oracle_compare(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                                const ChangeScenario& scenario, std::span<const SpiStatus> statuses,
                                                PropagationOptions engine_options = {});

}  // namespace dscms::oracle
