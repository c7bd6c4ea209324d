#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/json.hpp"
#include "dscms/observation.hpp"
#include "dscms/result.hpp"
#include "dscms/spi_catalog.hpp"
#include "dscms/time.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dscms {

struct ChangeScenario {
    std::set<std::string> breached_spis;
    /// Artifact references; a node is bound to `ref` by the tag `artifact:ref`.
    std::set<std::string> changed_artifacts;

    [[nodiscard]] bool empty() const { return breached_spis.empty() && changed_artifacts.empty(); }
    friend bool operator==(const ChangeScenario&, const ChangeScenario&) = default;
};

struct StatusTransition {
    NodeStatus from = NodeStatus::valid;
    NodeStatus to = NodeStatus::valid;

    friend bool operator==(const StatusTransition&, const StatusTransition&) = default;
};

/// One rule application: an edge analysed from an invalidated node.
struct TraceStep {
    Relationship edge;
    /// The invalidated endpoint the rule fired from.
    std::string source;
    /// The opposite endpoint the rule acted on.
    std::string target;
    NodeStatus result_status = NodeStatus::valid;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct ImpactReport {
    ChangeScenario scenario;
    std::set<std::string> direct;
    /// Invalidated through propagation.
    std::set<std::string> indirect;
    /// Marked under review; outside the impact area.
    std::set<std::string> flagged;
    std::map<std::string, StatusTransition> transitions;
    std::vector<TraceStep> trace;
    int case_version = 1;
    /// True when the top claim is invalidated.
    bool requires_argument_rebuild = false;

    [[nodiscard]] std::set<std::string> impact_area() const;
    [[nodiscard]] bool empty() const { return direct.empty() && indirect.empty(); }
    friend bool operator==(const ImpactReport&, const ImpactReport&) = default;
};

[[nodiscard]] Json to_json(const ImpactReport& report);
[[nodiscard]] Result<ImpactReport> impact_report_from_json(const Json& doc);
/// Byte-deterministic rendering.
[[nodiscard]] std::string serialize_report(const ImpactReport& report);

/// Nodes carrying a breached indicator or a changed-artifact tag.
[[nodiscard]] Result<std::set<std::string>> direct_impact(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                                          const ChangeScenario& scenario);

struct PropagationOptions {
    /// Test hook: ignore `flag` edges entirely. Used to check that the oracle
    /// comparison detects a defective engine.
    bool skip_flag_edges = false;
};

/// Worklist propagation of invalidation from `direct` along edge policies.
/// `statuses` decides spi-gated edges. Statuses on the input case are the
/// "old" side of each transition.
[[nodiscard]] ImpactReport propagate(const SafetyCase& safety_case, const std::set<std::string>& direct,
                                     std::span<const SpiStatus> statuses, PropagationOptions options = {});

/// True when any indicator attached to `node_id` is breached in `statuses`.
[[nodiscard]] bool has_breached_spi(const SafetyCase& safety_case, std::string_view node_id,
                                    std::span<const SpiStatus> statuses);

struct CheckResult {
    Evaluation evaluation;
    ImpactReport report;
};

/// evaluate_all, then direct_impact over the currently breached indicators
/// (level, not edge, semantics), then propagate.
[[nodiscard]] Result<CheckResult> check(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                        const ObservationStore& store, Timestamp now,
                                        std::span<const SpiStatus> previous = {},
                                        const std::set<std::string>& changed_artifacts = {});

/// Node statuses after a check: impact outcomes first, then `stale` for
/// claims with a stale indicator, everything else valid.
[[nodiscard]] SafetyCase apply_statuses(const SafetyCase& safety_case, const ImpactReport& report,
                                        std::span<const SpiStatus> statuses);

// ---------------------------------------------------------------- recovery

struct AddNode {
    ArgNode node;
};
struct AddEdge {
    std::string from;
    std::string to;
    RelKind rel = RelKind::supports;
    /// Absent means the default policy for the relationship and source kind.
    std::optional<PropagationPolicy> policy;
};
struct SetThreshold {
    std::string spi;
    Threshold threshold = Threshold::trend_only();
    Comparator comparator = Comparator::gte;
};
struct Reinstate {
    std::string node;
};
struct AttachEvidence {
    std::string node;
    ArgNode evidence;
};

using RecoveryAction = std::variant<AddNode, AddEdge, SetThreshold, Reinstate, AttachEvidence>;

[[nodiscard]] Json to_json(const RecoveryAction& action);
[[nodiscard]] Result<std::vector<RecoveryAction>> parse_recovery_actions(const Json& actions);

struct RecoveryOutcome {
    SafetyCase safety_case;
    SpiCatalog catalog;
    /// Audit-ready record of the applied batch.
    Json diff;
};

/// Applies a batch atomically: any failure leaves inputs untouched and
/// returns the errors. Reinstated claims become valid and their own
/// indicators are re-baselined at `at`.
[[nodiscard]] Result<RecoveryOutcome> apply_recovery(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                                     std::span<const RecoveryAction> actions, Timestamp at);

struct RevalidationReport {
    bool clean = false;
    ImpactReport residual;
};

[[nodiscard]] Result<RevalidationReport> revalidate(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                                    const ObservationStore& store, Timestamp now);

}  // namespace dscms
