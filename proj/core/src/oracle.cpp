#include "dscms/oracle.hpp"

#include <algorithm>
#include <iterator>

namespace dscms::oracle {

namespace {

std::set<std::string> minus(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

}  // namespace

Fixpoint exhaustive_fixpoint(const SafetyCase& safety_case, const std::set<std::string>& direct,
                             std::span<const SpiStatus> statuses) {
    // Deliberately naive: statuses live in a flat map, every sweep visits
    // every edge in both directions, and indicator lookups are recomputed.
    std::map<std::string, NodeStatus> status;
    for (const auto& [id, node] : safety_case.nodes()) {
        status[id] = direct.contains(id) ? NodeStatus::invalidated : NodeStatus::valid;
    }
    const auto own_breach = [&](const std::string& id) {
        for (const auto& s : statuses) {
            if (!s.breached) {
                continue;
            }
            for (const auto& a : safety_case.attachments()) {
                if (a.spi_id == s.spi && a.claim_id == id) {
                    return true;
                }
            }
        }
        return false;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& edge : safety_case.edges()) {
            for (int side = 0; side < 2; ++side) {
                const std::string& from = side == 0 ? edge.from : edge.to;
                const std::string& other = side == 0 ? edge.to : edge.from;
                if (!status.contains(from) || !status.contains(other) ||
                    status[from] != NodeStatus::invalidated) {
                    continue;
                }
                NodeStatus wanted = NodeStatus::under_review;
                if (edge.policy == PropagationPolicy::invalidate ||
                    (edge.policy == PropagationPolicy::spi_gated && own_breach(other))) {
                    wanted = NodeStatus::invalidated;
                }
                const NodeStatus current = status[other];
                if (current == NodeStatus::invalidated) {
                    continue;
                }
                if (wanted == NodeStatus::invalidated || current != NodeStatus::under_review) {
                    if (current != wanted) {
                        status[other] = wanted;
                        changed = true;
                    }
                }
            }
        }
    }

    Fixpoint out;
    for (const auto& [id, s] : status) {
        if (s == NodeStatus::invalidated) {
            out.invalidated.insert(id);
        } else if (s == NodeStatus::under_review) {
            out.under_review.insert(id);
        }
    }
    return out;
}

Result<Comparison> oracle_compare(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                  const ChangeScenario& scenario, std::span<const SpiStatus> statuses,
                                  PropagationOptions engine_options) {
    auto direct = direct_impact(safety_case, catalog, scenario);
    if (!direct) {
        return std::move(direct).errors();
    }
    const ImpactReport report = propagate(safety_case, direct.value(), statuses, engine_options);
    const Fixpoint expected = exhaustive_fixpoint(safety_case, direct.value(), statuses);
    std::set<std::string> engine_affected = report.impact_area();
    engine_affected.insert(report.flagged.begin(), report.flagged.end());
    std::set<std::string> oracle_affected = expected.invalidated;
    oracle_affected.insert(expected.under_review.begin(), expected.under_review.end());

    Comparison out;
    out.false_negatives = minus(oracle_affected, engine_affected);
    out.false_positives = minus(engine_affected, oracle_affected);
    const auto engine_invalidated = report.impact_area();
    for (const auto& id : oracle_affected) {
        if (engine_affected.contains(id) && expected.invalidated.contains(id) != engine_invalidated.contains(id)) {
            out.status_mismatches.insert(id);
        }
    }
    return out;
}

}  // namespace dscms::oracle
