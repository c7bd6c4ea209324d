#include "dscms/governance.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace dscms {

namespace {

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum value) {
    for (const auto& [v, name] : table) {
        if (v == value) {
            return name;
        }
    }
    return "unknown";
}

template <typename Enum, std::size_t N>
std::optional<Enum> value_of(const std::array<std::pair<Enum, std::string_view>, N>& table, std::string_view text) {
    for (const auto& [v, name] : table) {
        if (name == text) {
            return v;
        }
    }
    return std::nullopt;
}

constexpr std::array<std::pair<InsightCategory, std::string_view>, 3> kCategories{{
    {InsightCategory::capability_increase, "capability_increase"},
    {InsightCategory::systemic_impact, "systemic_impact"},
    {InsightCategory::internal_process, "internal_process"},
}};

constexpr std::array<std::pair<Severity, std::string_view>, 4> kSeverities{{
    {Severity::none, "none"},
    {Severity::medium_low, "medium_low"},
    {Severity::high_medium, "high_medium"},
    {Severity::highest, "highest"},
}};

constexpr std::array<std::pair<Role, std::string_view>, 4> kRoles{{
    {Role::responsible_scaling_officer, "responsible_scaling_officer"},
    {Role::executive_leadership, "executive_leadership"},
    {Role::safety_team, "safety_team"},
    {Role::external_oversight, "external_oversight"},
}};

constexpr std::array<std::pair<RequiredAction, std::string_view>, 6> kActions{{
    {RequiredAction::log_in_report, "log_in_report"},
    {RequiredAction::notify_rso_ceo, "notify_rso_ceo"},
    {RequiredAction::full_capability_reevaluation, "full_capability_reevaluation"},
    {RequiredAction::pause_training_or_deployment, "pause_training_or_deployment"},
    {RequiredAction::rsp_reevaluation, "rsp_reevaluation"},
    {RequiredAction::update_evaluations, "update_evaluations"},
}};

const std::array<RequirementTrace, 9> kTraces{{
    {"REQ-001", "Case documents are parsed into a checked argument graph with structural validation",
     "ArgumentModel.BundledCaseParsesAndValidates"},
    {"REQ-002", "Versioned case serialization, atomic recovery batches and crash-safe workspace snapshots",
     "Workspace.PersistLoadRoundTrip"},
    {"REQ-005", "Consistency check composing indicator evaluation, direct impact and propagation",
     "Scenarios.ReproduceBreachAndInvalidationSets"},
    {"REQ-017", "Indicator catalog with thresholds, comparators, windows and update frequencies",
     "Catalog.BundledRowsMatchAnnotations"},
    {"REQ-018", "Edge-triggered breach events feeding severity routing and alerts",
     "SpiCatalog.ScenarioOneBreachEventsAreEdgeTriggered"},
    {"REQ-019", "Feed mappings turning raw records into indicator observations",
     "Ingestion.MapFeedRoutesRecordToIndicator"},
    {"REQ-020", "Observation ingestion triggers a consistency check", "Engine.IngestTriggersCheck"},
    {"REQ-023", "Governance report and read endpoints over the service interface",
     "Governance.ReportIsDeterministic"},
    {"REQ-025", "Role-scoped bearer tokens and a hash-chained audit log", "Api.RolesAndScopesAreEnforced"},
}};

Json category_list(const std::set<InsightCategory>& categories) {
    Json out = Json::array();
    for (const auto c : categories) {
        out.push_back(to_string(c));
    }
    return out;
}

}  // namespace

std::string_view to_string(InsightCategory category) { return name_of(kCategories, category); }
std::string_view to_string(Severity severity) { return name_of(kSeverities, severity); }
std::string_view to_string(Role role) { return name_of(kRoles, role); }
std::string_view to_string(RequiredAction action) { return name_of(kActions, action); }
std::optional<InsightCategory> parse_insight_category(std::string_view text) { return value_of(kCategories, text); }
std::optional<Severity> parse_severity(std::string_view text) { return value_of(kSeverities, text); }
std::optional<Role> parse_role(std::string_view text) { return value_of(kRoles, text); }
std::optional<RequiredAction> parse_required_action(std::string_view text) { return value_of(kActions, text); }

Severity severity_of(InsightCategory category) {
    switch (category) {
        case InsightCategory::capability_increase:
            return Severity::highest;
        case InsightCategory::systemic_impact:
            return Severity::high_medium;
        case InsightCategory::internal_process:
            return Severity::medium_low;
    }
    return Severity::none;
}

Classification classify(const ImpactReport& report, const SafetyCase& safety_case) {
    Classification out;
    for (const auto& id : report.impact_area()) {
        const ArgNode* node = safety_case.find(id);
        if (node == nullptr || node->kind != NodeKind::claim) {
            continue;
        }
        if (node->has_tag(kCapabilityTag)) {
            out.categories.insert(InsightCategory::capability_increase);
        }
        if (node->has_tag(kSystemicTag)) {
            out.categories.insert(InsightCategory::systemic_impact);
        }
        if (node->has_tag(kProcessTag)) {
            out.categories.insert(InsightCategory::internal_process);
        }
    }
    for (const auto c : out.categories) {
        out.severity = std::max(out.severity, severity_of(c));
    }
    return out;
}

std::optional<Alert> route(Severity severity, const std::set<InsightCategory>& categories) {
    Alert alert;
    alert.severity = severity;
    alert.categories = categories;
    switch (severity) {
        case Severity::none:
            return std::nullopt;
        case Severity::medium_low:
            alert.recipients = {Role::safety_team};
            alert.required_actions = {RequiredAction::update_evaluations, RequiredAction::log_in_report};
            break;
        case Severity::high_medium:
            alert.recipients = {Role::responsible_scaling_officer, Role::executive_leadership, Role::safety_team};
            alert.required_actions = {RequiredAction::notify_rso_ceo, RequiredAction::full_capability_reevaluation};
            alert.asl_hint = "review capability level";
            break;
        case Severity::highest:
            alert.recipients = {Role::responsible_scaling_officer, Role::executive_leadership, Role::safety_team,
                                Role::external_oversight};
            alert.required_actions = {RequiredAction::pause_training_or_deployment, RequiredAction::rsp_reevaluation,
                                      RequiredAction::full_capability_reevaluation, RequiredAction::notify_rso_ceo};
            alert.asl_hint = "capability level may have risen";
            break;
    }
    return alert;
}

Json to_json(const Alert& alert) {
    Json j;
    j["severity"] = to_string(alert.severity);
    j["categories"] = category_list(alert.categories);
    Json recipients = Json::array();
    for (const auto r : alert.recipients) {
        recipients.push_back(to_string(r));
    }
    j["recipients"] = std::move(recipients);
    Json actions = Json::array();
    for (const auto a : alert.required_actions) {
        actions.push_back(to_string(a));
    }
    j["required_actions"] = std::move(actions);
    j["asl_hint"] = alert.asl_hint;
    j["case_version"] = alert.case_version;
    j["impact_area"] = Json(alert.impact_area);
    j["raised_at"] = alert.raised_at;
    return j;
}

Result<Alert> alert_from_json(const Json& doc) {
    detail::FieldReader r(doc, "alert");
    Alert a;
    const auto severity = r.string("severity");
    const auto categories = r.string_list("categories");
    const auto recipients = r.string_list("recipients");
    const auto actions = r.string_list("required_actions");
    a.asl_hint = r.string("asl_hint", false).value_or("");
    a.case_version = static_cast<int>(r.integer("case_version").value_or(0));
    a.impact_area = r.string_list("impact_area", false).value_or(std::vector<std::string>{});
    a.raised_at = r.string("raised_at", false).value_or("");
    if (severity) {
        if (const auto s = parse_severity(*severity)) {
            a.severity = *s;
        } else {
            r.fail("bad-field", "unknown severity");
        }
    }
    for (const auto& c : categories.value_or(std::vector<std::string>{})) {
        if (const auto v = parse_insight_category(c)) {
            a.categories.insert(*v);
        } else {
            r.fail("bad-field", "unknown category '" + c + "'");
        }
    }
    for (const auto& c : recipients.value_or(std::vector<std::string>{})) {
        if (const auto v = parse_role(c)) {
            a.recipients.insert(*v);
        } else {
            r.fail("bad-field", "unknown role '" + c + "'");
        }
    }
    for (const auto& c : actions.value_or(std::vector<std::string>{})) {
        if (const auto v = parse_required_action(c)) {
            a.required_actions.push_back(*v);
        } else {
            r.fail("bad-field", "unknown action '" + c + "'");
        }
    }
    if (!r.errors().empty()) {
        return r.take_errors();
    }
    return a;
}

// ---------------------------------------------------------------- gates

std::vector<GateDef> default_gates() {
    return {
        {"G1", "development to internal evaluation"},
        {"G2", "internal evaluation to limited release"},
        {"G3", "limited release to general deployment"},
        {"G4", "periodic in-service review"},
    };
}

Result<GateResult> evaluate_gate(std::string_view gate, std::span<const GateDef> gates, const SafetyCase& safety_case,
                                 std::span<const SpiStatus> statuses,
                                 std::span<const OpenRecovery> open_recoveries) {
    const bool known = std::any_of(gates.begin(), gates.end(), [&](const GateDef& g) { return g.id == gate; });
    if (!known) {
        return Error::make("unknown-gate", "no gate with id '" + std::string(gate) + "'", std::string(gate));
    }
    GateResult result;
    result.gate = std::string(gate);
    for (const auto& [id, node] : safety_case.nodes()) {
        if (node.kind != NodeKind::claim) {
            continue;
        }
        if (node.status == NodeStatus::invalidated) {
            result.blockers.push_back({"invalidated-claim", id});
        } else if (node.status == NodeStatus::under_review) {
            result.blockers.push_back({"under-review-claim", id});
        }
    }
    for (const auto& s : statuses) {
        if (s.stale) {
            result.blockers.push_back({"stale-spi", s.spi});
        }
    }
    for (const auto& r : open_recoveries) {
        result.blockers.push_back({"open-recovery", r.id});
    }
    std::sort(result.blockers.begin(), result.blockers.end());
    if (!statuses.empty()) {
        result.evaluated_at = format_timestamp(statuses.front().evaluated_at);
    }
    result.passed = result.blockers.empty();
    return result;
}

Json to_json(const GateResult& result) {
    Json j;
    j["gate"] = result.gate;
    j["passed"] = result.passed;
    Json blockers = Json::array();
    for (const auto& b : result.blockers) {
        blockers.push_back(Json{{"kind", b.kind}, {"id", b.id}});
    }
    j["blockers"] = std::move(blockers);
    j["evaluated_at"] = result.evaluated_at;
    return j;
}

Result<GateResult> gate_result_from_json(const Json& doc) {
    detail::FieldReader r(doc, "gate");
    GateResult g;
    g.gate = r.string("gate").value_or("");
    g.evaluated_at = r.string("evaluated_at", false).value_or("");
    if (!doc.is_object() || !doc.contains("passed") || !doc.at("passed").is_boolean() || !doc.contains("blockers") ||
        !doc.at("blockers").is_array()) {
        r.fail("bad-field", "gate result needs 'passed' and 'blockers'");
    } else {
        g.passed = doc.at("passed").get<bool>();
        for (const auto& b : doc.at("blockers")) {
            detail::FieldReader br(b, "gate.blockers");
            const auto kind = br.string("kind");
            const auto id = br.string("id");
            if (kind && id) {
                g.blockers.push_back({*kind, *id});
            } else {
                r.fail("bad-field", "malformed blocker");
            }
        }
    }
    if (!r.errors().empty()) {
        return r.take_errors();
    }
    return g;
}

Json to_json(const OpenRecovery& recovery) {
    return Json{{"id", recovery.id}, {"description", recovery.description}};
}

// ---------------------------------------------------------------- report

std::span<const RequirementTrace> requirement_traces() {
    return kTraces;
}

Json governance_report(const ReportInputs& in) {
    Json doc;
    const SafetyCase empty_case;
    const SafetyCase& c = in.safety_case != nullptr ? *in.safety_case : empty_case;
    doc["case_id"] = c.case_id();
    doc["case_version"] = c.version();

    Classification cls;
    if (in.impact != nullptr) {
        cls = classify(*in.impact, c);
    }
    const auto top = c.top_id();
    Json headline;
    headline["severity"] = to_string(cls.severity);
    headline["categories"] = category_list(cls.categories);
    headline["top_claim"] = top ? Json(*top) : Json(nullptr);
    headline["top_claim_status"] = top ? Json(to_string(c.status_of(*top))) : Json(nullptr);
    headline["top_claim_invalidated"] = top && c.status_of(*top) == NodeStatus::invalidated;
    headline["requires_argument_rebuild"] = in.impact != nullptr && in.impact->requires_argument_rebuild;
    doc["headline"] = std::move(headline);

    Json claims = Json::array();
    for (const auto& [id, node] : c.nodes()) {
        if (node.kind == NodeKind::claim) {
            claims.push_back(Json{{"id", id}, {"status", to_string(node.status)}});
        }
    }
    doc["claims"] = std::move(claims);

    Json spis = Json::array();
    for (const auto& s : in.statuses) {
        Json j;
        j["id"] = s.spi;
        const SpiDef* def = in.catalog != nullptr ? in.catalog->find(s.spi) : nullptr;
        j["claim"] = def != nullptr ? Json(def->claim) : Json(nullptr);
        j["kind"] = def != nullptr ? Json(to_string(def->kind)) : Json(nullptr);
        j["value"] = s.value ? Json(*s.value) : Json(nullptr);
        if (def != nullptr && !def->threshold.is_trend_only()) {
            j["threshold"] = *def->threshold.value();
        } else {
            j["threshold"] = "trend_only";
        }
        j["comparator"] = def != nullptr ? Json(to_string(def->comparator)) : Json(nullptr);
        j["breached"] = s.breached;
        j["stale"] = s.stale;
        j["evaluated_at"] = format_timestamp(s.evaluated_at);
        spis.push_back(std::move(j));
    }
    doc["spis"] = std::move(spis);

    Json alerts = Json::array();
    for (const auto& a : in.alerts) {
        alerts.push_back(to_json(a));
    }
    doc["alerts"] = std::move(alerts);
    Json gates = Json::array();
    for (const auto& g : in.gates) {
        gates.push_back(to_json(g));
    }
    doc["gates"] = std::move(gates);
    doc["impact"] = in.impact != nullptr ? to_json(*in.impact) : Json(nullptr);

    Json traces = Json::array();
    for (const auto& t : requirement_traces()) {
        traces.push_back(Json{{"requirement", t.requirement}, {"feature", t.feature}, {"verified_by", t.verified_by}});
    }
    doc["requirements_traceability"] = std::move(traces);
    return doc;
}

std::string render_governance_report(const ReportInputs& inputs) {
    return governance_report(inputs).dump(2) + "\n";
}

}  // namespace dscms
