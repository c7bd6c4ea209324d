#pragma once

// Random case generator shared by the unit tests, the acceptance binary and
// the benchmarks. It has no test-framework dependency.

#include "dscms/argument_model.hpp"
#include "dscms/consistency.hpp"
#include "dscms/spi_catalog.hpp"
#include "dscms/time.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace dscms::testing {

inline const Timestamp kRandomCaseLoadedAt = Timestamp{std::chrono::sys_days{std::chrono::year{2025} / 1 / 1}};

/// A structurally valid random case with indicators, plus a random breach set.
struct RandomCase {
    SafetyCase safety_case;
    SpiCatalog catalog;
    std::vector<SpiStatus> statuses;
    ChangeScenario scenario;
};

inline PropagationPolicy random_policy(std::mt19937& rng) {
    constexpr PropagationPolicy kPolicies[] = {PropagationPolicy::invalidate, PropagationPolicy::flag,
                                               PropagationPolicy::spi_gated};
    return kPolicies[std::uniform_int_distribution<int>(0, 2)(rng)];
}

inline RandomCase random_case(std::mt19937& rng, int max_nodes) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int claim_count = std::uniform_int_distribution<int>(1, std::max(1, max_nodes * 2 / 3))(rng);
    const int other_count = std::uniform_int_distribution<int>(0, max_nodes - claim_count)(rng);

    std::vector<ArgNode> nodes;
    std::vector<Relationship> edges;
    std::vector<SpiAttachment> attachments;
    RandomCase out;
    out.catalog = SpiCatalog(kRandomCaseLoadedAt);

    for (int i = 0; i < claim_count; ++i) {
        ArgNode n;
        n.id = "N" + std::to_string(i);
        n.kind = NodeKind::claim;
        if (i == 0) {
            n.tags.insert(std::string(kTopTag));
        }
        nodes.push_back(n);
        if (i > 0) {
            // Parents always have a lower index, so supports edges stay acyclic.
            std::set<int> parents{std::uniform_int_distribution<int>(0, i - 1)(rng)};
            if (unit(rng) < 0.3) {
                parents.insert(std::uniform_int_distribution<int>(0, i - 1)(rng));
            }
            for (const int p : parents) {
                edges.push_back({n.id, "N" + std::to_string(p), RelKind::supports, random_policy(rng)});
            }
        }
        const int spi_count = std::uniform_int_distribution<int>(0, 2)(rng);
        for (int k = 0; k < spi_count; ++k) {
            SpiDef d;
            d.id = n.id + "-S" + std::to_string(k);
            d.claim = n.id;
            d.title = d.id;
            d.aggregation = Aggregation::latest;
            d.comparator = Comparator::gte;
            d.threshold = Threshold::numeric(1.0);
            attachments.push_back({d.id, n.id});
            const bool breached = unit(rng) < 0.25;
            SpiStatus st;
            st.spi = d.id;
            st.value = breached ? 2.0 : 0.0;
            st.breached = breached;
            st.evaluated_at = kRandomCaseLoadedAt + std::chrono::days{1};
            st.contributing_observation_count = 1;
            out.statuses.push_back(st);
            if (breached) {
                out.scenario.breached_spis.insert(d.id);
            }
            (void)out.catalog.add(std::move(d));
        }
    }
    for (int j = 0; j < other_count; ++j) {
        ArgNode n;
        n.id = "M" + std::to_string(j);
        const std::string target = "N" + std::to_string(std::uniform_int_distribution<int>(0, claim_count - 1)(rng));
        const double pick = unit(rng);
        if (pick < 0.5) {
            n.kind = NodeKind::evidence;
            n.tags.insert(std::string(kArtifactTagPrefix) + n.id);
            edges.push_back({n.id, target, RelKind::supports, random_policy(rng)});
            if (unit(rng) < 0.2) {
                out.scenario.changed_artifacts.insert(n.id);
            }
        } else if (pick < 0.7) {
            n.kind = NodeKind::strategy;
            edges.push_back({n.id, target, RelKind::supports, random_policy(rng)});
        } else if (pick < 0.85) {
            n.kind = NodeKind::context;
            edges.push_back({n.id, target, RelKind::in_context_of, random_policy(rng)});
        } else {
            n.kind = NodeKind::defeater;
            edges.push_back({n.id, target, RelKind::challenges, random_policy(rng)});
        }
        nodes.push_back(std::move(n));
    }
    out.safety_case = SafetyCase::from_parts("random", 1, std::move(nodes), std::move(edges), std::move(attachments));
    return out;
}

}  // namespace dscms::testing
