#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/consistency.hpp"
#include "dscms/json.hpp"
#include "dscms/result.hpp"
#include "dscms/spi_catalog.hpp"
#include "dscms/time.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dscms {

enum class InsightCategory { capability_increase, systemic_impact, internal_process };
/// Declared in ascending order so that comparison follows severity.
enum class Severity { none, medium_low, high_medium, highest };
enum class Role { responsible_scaling_officer, executive_leadership, safety_team, external_oversight };
enum class RequiredAction {
    log_in_report,
    notify_rso_ceo,
    full_capability_reevaluation,
    pause_training_or_deployment,
    rsp_reevaluation,
    update_evaluations,
};

[[nodiscard]] std::string_view to_string(InsightCategory category);
[[nodiscard]] std::string_view to_string(Severity severity);
[[nodiscard]] std::string_view to_string(Role role);
[[nodiscard]] std::string_view to_string(RequiredAction action);
[[nodiscard]] std::optional<InsightCategory> parse_insight_category(std::string_view text);
[[nodiscard]] std::optional<Severity> parse_severity(std::string_view text);
[[nodiscard]] std::optional<Role> parse_role(std::string_view text);
[[nodiscard]] std::optional<RequiredAction> parse_required_action(std::string_view text);

/// Node tags that map onto insight categories.
inline constexpr std::string_view kCapabilityTag = "capability-uplift-indicator";
inline constexpr std::string_view kSystemicTag = "systemic-threat-indicator";
inline constexpr std::string_view kProcessTag = "process-indicator";

[[nodiscard]] Severity severity_of(InsightCategory category);

struct Classification {
    std::set<InsightCategory> categories;
    Severity severity = Severity::none;

    friend bool operator==(const Classification&, const Classification&) = default;
};

/// Categories are read from the tags of invalidated claims; severity is the
/// highest severity among them.
[[nodiscard]] Classification classify(const ImpactReport& report, const SafetyCase& safety_case);

struct Alert {
    Severity severity = Severity::none;
    std::set<InsightCategory> categories;
    std::set<Role> recipients;
    std::vector<RequiredAction> required_actions;
    /// Free-form capability-level hint; no ladder is enforced.
    std::string asl_hint;
    /// Identifies the impact report the alert was raised for.
    int case_version = 0;
    std::vector<std::string> impact_area;
    std::string raised_at;

    friend bool operator==(const Alert&, const Alert&) = default;
};

/// Recipients and required actions as a pure function of severity. Returns
/// nothing for severity none.
[[nodiscard]] std::optional<Alert> route(Severity severity, const std::set<InsightCategory>& categories);

[[nodiscard]] Json to_json(const Alert& alert);
[[nodiscard]] Result<Alert> alert_from_json(const Json& doc);

// ---------------------------------------------------------------- gates

struct GateDef {
    std::string id;
    std::string name;
};

/// Default lifecycle checkpoints; deployments may supply their own list.
[[nodiscard]] std::vector<GateDef> default_gates();

struct OpenRecovery {
    std::string id;
    std::string description;

    friend bool operator==(const OpenRecovery&, const OpenRecovery&) = default;
};

struct Blocker {
    /// invalidated-claim, under-review-claim, stale-spi or open-recovery.
    std::string kind;
    std::string id;

    friend auto operator<=>(const Blocker&, const Blocker&) = default;
};

struct GateResult {
    std::string gate;
    bool passed = false;
    std::vector<Blocker> blockers;
    std::string evaluated_at;

    friend bool operator==(const GateResult&, const GateResult&) = default;
};

[[nodiscard]] Result<GateResult> evaluate_gate(std::string_view gate, std::span<const GateDef> gates,
                                               const SafetyCase& safety_case, std::span<const SpiStatus> statuses,
                                               std::span<const OpenRecovery> open_recoveries);

[[nodiscard]] Json to_json(const GateResult& result);
[[nodiscard]] Result<GateResult> gate_result_from_json(const Json& doc);
[[nodiscard]] Json to_json(const OpenRecovery& recovery);

// ---------------------------------------------------------------- report

struct RequirementTrace {
    std::string requirement;
    std::string feature;
    std::string verified_by;
};

/// Requirement ids exercised by this library, with the feature and test
/// covering each.
[[nodiscard]] std::span<const RequirementTrace> requirement_traces();

struct ReportInputs {
    const SafetyCase* safety_case = nullptr;
    const SpiCatalog* catalog = nullptr;
    std::span<const SpiStatus> statuses;
    std::span<const Alert> alerts;
    std::span<const GateResult> gates;
    const ImpactReport* impact = nullptr;
};

[[nodiscard]] Json governance_report(const ReportInputs& inputs);
/// Byte-deterministic rendering of governance_report.
[[nodiscard]] std::string render_governance_report(const ReportInputs& inputs);

}  // namespace dscms
