#include "dscms/consistency.hpp"

#include "json_io.hpp"

#include <algorithm>

namespace dscms {

namespace {

Json id_list(const std::set<std::string>& ids) {
    return Json(std::vector<std::string>(ids.begin(), ids.end()));
}

std::optional<std::set<std::string>> read_id_set(const Json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
        return std::nullopt;
    }
    std::set<std::string> out;
    for (const auto& item : doc.at(key)) {
        if (!item.is_string()) {
            return std::nullopt;
        }
        out.insert(item.get<std::string>());
    }
    return out;
}

std::optional<NodeStatus> read_status(const Json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_string()) {
        return std::nullopt;
    }
    return parse_node_status(doc.at(key).get<std::string>());
}

}  // namespace

std::set<std::string> ImpactReport::impact_area() const {
    std::set<std::string> area = direct;
    area.insert(indirect.begin(), indirect.end());
    return area;
}

Json to_json(const ImpactReport& report) {
    Json j;
    j["case_version"] = report.case_version;
    j["scenario"] = Json{{"breached_spis", id_list(report.scenario.breached_spis)},
                         {"changed_artifacts", id_list(report.scenario.changed_artifacts)}};
    j["direct"] = id_list(report.direct);
    j["indirect"] = id_list(report.indirect);
    j["impact_area"] = id_list(report.impact_area());
    j["flagged"] = id_list(report.flagged);
    j["requires_argument_rebuild"] = report.requires_argument_rebuild;
    Json transitions = Json::array();
    for (const auto& [node, t] : report.transitions) {
        transitions.push_back(Json{{"node", node}, {"from", to_string(t.from)}, {"to", to_string(t.to)}});
    }
    j["transitions"] = std::move(transitions);
    Json trace = Json::array();
    for (const auto& step : report.trace) {
        Json s;
        s["edge"] = Json{{"from", step.edge.from}, {"to", step.edge.to}, {"rel", to_string(step.edge.rel)}};
        s["policy"] = to_string(step.edge.policy);
        s["source"] = step.source;
        s["target"] = step.target;
        s["result_status"] = to_string(step.result_status);
        trace.push_back(std::move(s));
    }
    j["trace"] = std::move(trace);
    return j;
}

std::string serialize_report(const ImpactReport& report) {
    return to_json(report).dump(2) + "\n";
}

Result<ImpactReport> impact_report_from_json(const Json& doc) {
    const auto bad = [](const std::string& what) {
        return Error::make("bad-report", "impact report: " + what, "impact");
    };
    if (!doc.is_object()) {
        return bad("expected an object");
    }
    ImpactReport r;
    if (!doc.contains("case_version") || !doc.at("case_version").is_number_integer()) {
        return bad("case_version");
    }
    r.case_version = doc.at("case_version").get<int>();
    if (!doc.contains("scenario") || !doc.at("scenario").is_object()) {
        return bad("scenario");
    }
    const auto breached = read_id_set(doc.at("scenario"), "breached_spis");
    const auto artifacts = read_id_set(doc.at("scenario"), "changed_artifacts");
    const auto direct = read_id_set(doc, "direct");
    const auto indirect = read_id_set(doc, "indirect");
    const auto flagged = read_id_set(doc, "flagged");
    if (!breached || !artifacts || !direct || !indirect || !flagged) {
        return bad("id lists");
    }
    r.scenario = {*breached, *artifacts};
    r.direct = *direct;
    r.indirect = *indirect;
    r.flagged = *flagged;
    r.requires_argument_rebuild = doc.value("requires_argument_rebuild", false);
    if (!doc.contains("transitions") || !doc.at("transitions").is_array()) {
        return bad("transitions");
    }
    for (const auto& t : doc.at("transitions")) {
        const auto from = read_status(t, "from");
        const auto to = read_status(t, "to");
        if (!t.contains("node") || !t.at("node").is_string() || !from || !to) {
            return bad("transition entry");
        }
        r.transitions[t.at("node").get<std::string>()] = {*from, *to};
    }
    if (!doc.contains("trace") || !doc.at("trace").is_array()) {
        return bad("trace");
    }
    for (const auto& s : doc.at("trace")) {
        TraceStep step;
        detail::FieldReader fr(s, "trace");
        step.source = fr.string("source").value_or("");
        step.target = fr.string("target").value_or("");
        const auto policy = fr.string("policy");
        const auto result = read_status(s, "result_status");
        if (!fr.errors().empty() || !policy || !parse_policy(*policy) || !result || !s.contains("edge")) {
            return bad("trace entry");
        }
        detail::FieldReader er(s.at("edge"), "trace.edge");
        step.edge.from = er.string("from").value_or("");
        step.edge.to = er.string("to").value_or("");
        const auto rel = er.string("rel");
        if (!er.errors().empty() || !rel || !parse_rel_kind(*rel)) {
            return bad("trace edge");
        }
        step.edge.rel = *parse_rel_kind(*rel);
        step.edge.policy = *parse_policy(*policy);
        step.result_status = *result;
        r.trace.push_back(std::move(step));
    }
    return r;
}

Result<std::set<std::string>> direct_impact(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                            const ChangeScenario& scenario) {
    std::set<std::string> out;
    std::vector<Error> errors;
    for (const auto& spi : scenario.breached_spis) {
        if (catalog.find(spi) == nullptr) {
            errors.push_back(Error::make("unknown-spi", "indicator '" + spi + "' is not in the catalog", spi));
            continue;
        }
        const auto node = safety_case.node_of_spi(spi);
        if (!node || !safety_case.contains(*node)) {
            errors.push_back(Error::make("unattached-spi", "indicator '" + spi + "' is attached to no node", spi));
            continue;
        }
        out.insert(*node);
    }
    for (const auto& ref : scenario.changed_artifacts) {
        const std::string tag = std::string(kArtifactTagPrefix) + ref;
        bool found = false;
        for (const auto& [id, node] : safety_case.nodes()) {
            if (node.has_tag(tag)) {
                out.insert(id);
                found = true;
            }
        }
        if (!found) {
            errors.push_back(Error::make("unknown-artifact", "no node is tagged with artifact '" + ref + "'", ref));
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return out;
}

bool has_breached_spi(const SafetyCase& safety_case, std::string_view node_id, std::span<const SpiStatus> statuses) {
    const auto attached = safety_case.spis_of(node_id);
    return std::any_of(statuses.begin(), statuses.end(), [&](const SpiStatus& s) {
        return s.breached && std::binary_search(attached.begin(), attached.end(), s.spi);
    });
}

ImpactReport propagate(const SafetyCase& safety_case, const std::set<std::string>& direct,
                       std::span<const SpiStatus> statuses, PropagationOptions options) {
    ImpactReport report;
    report.case_version = safety_case.version();

    const auto& edges = safety_case.edges();
    std::map<std::string, std::vector<std::size_t>> incident;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        incident[edges[i].from].push_back(i);
        if (edges[i].to != edges[i].from) {
            incident[edges[i].to].push_back(i);
        }
    }

    std::set<std::string> invalidated;
    std::set<std::string> worklist;
    for (const auto& id : direct) {
        if (safety_case.contains(id)) {
            report.direct.insert(id);
            invalidated.insert(id);
            worklist.insert(id);
        }
    }

    std::vector<bool> analysed(edges.size(), false);
    std::map<std::string, bool> gate_cache;
    const auto gated_breach = [&](const std::string& node) {
        const auto it = gate_cache.find(node);
        if (it != gate_cache.end()) {
            return it->second;
        }
        const bool breached = has_breached_spi(safety_case, node, statuses);
        gate_cache.emplace(node, breached);
        return breached;
    };

    while (!worklist.empty()) {
        const std::string current = *worklist.begin();
        worklist.erase(worklist.begin());
        const auto inc = incident.find(current);
        if (inc == incident.end()) {
            continue;
        }
        for (const std::size_t idx : inc->second) {
            if (analysed[idx]) {
                continue;
            }
            analysed[idx] = true;
            const Relationship& edge = edges[idx];
            if (options.skip_flag_edges && edge.policy == PropagationPolicy::flag) {
                continue;
            }
            const std::string& other = edge.from == current ? edge.to : edge.from;
            bool invalidate = false;
            switch (edge.policy) {
                case PropagationPolicy::invalidate:
                    invalidate = true;
                    break;
                case PropagationPolicy::flag:
                    break;
                case PropagationPolicy::spi_gated:
                    invalidate = gated_breach(other);
                    break;
            }
            if (invalidate) {
                if (invalidated.insert(other).second) {
                    report.flagged.erase(other);
                    worklist.insert(other);
                }
            } else if (!invalidated.contains(other)) {
                report.flagged.insert(other);
            }
            const NodeStatus result = invalidated.contains(other) ? NodeStatus::invalidated : NodeStatus::under_review;
            report.trace.push_back({edge, current, other, result});
        }
    }

    for (const auto& id : invalidated) {
        if (!report.direct.contains(id)) {
            report.indirect.insert(id);
        }
        report.transitions[id] = {safety_case.status_of(id), NodeStatus::invalidated};
    }
    for (const auto& id : report.flagged) {
        report.transitions[id] = {safety_case.status_of(id), NodeStatus::under_review};
    }
    const auto top = safety_case.top_id();
    report.requires_argument_rebuild = top && invalidated.contains(*top);
    return report;
}

Result<CheckResult> check(const SafetyCase& safety_case, const SpiCatalog& catalog, const ObservationStore& store,
                          Timestamp now, std::span<const SpiStatus> previous,
                          const std::set<std::string>& changed_artifacts) {
    CheckResult result;
    result.evaluation = evaluate_all(catalog, store, now, previous);
    ChangeScenario scenario;
    for (const auto& s : result.evaluation.statuses) {
        if (s.breached) {
            scenario.breached_spis.insert(s.spi);
        }
    }
    scenario.changed_artifacts = changed_artifacts;
    auto direct = direct_impact(safety_case, catalog, scenario);
    if (!direct) {
        return std::move(direct).errors();
    }
    result.report = propagate(safety_case, direct.value(), result.evaluation.statuses);
    result.report.scenario = std::move(scenario);
    return result;
}

SafetyCase apply_statuses(const SafetyCase& safety_case, const ImpactReport& report,
                          std::span<const SpiStatus> statuses) {
    std::set<std::string> stale_spis;
    for (const auto& s : statuses) {
        if (s.stale) {
            stale_spis.insert(s.spi);
        }
    }
    std::map<std::string, NodeStatus> next;
    const auto area = report.impact_area();
    for (const auto& [id, node] : safety_case.nodes()) {
        NodeStatus status = NodeStatus::valid;
        if (area.contains(id)) {
            status = NodeStatus::invalidated;
        } else if (report.flagged.contains(id)) {
            status = NodeStatus::under_review;
        } else if (node.kind == NodeKind::claim) {
            const auto spis = safety_case.spis_of(id);
            if (std::any_of(spis.begin(), spis.end(), [&](const std::string& s) { return stale_spis.contains(s); })) {
                status = NodeStatus::stale;
            }
        }
        next[id] = status;
    }
    return safety_case.with_statuses(next);
}

Result<RevalidationReport> revalidate(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                      const ObservationStore& store, Timestamp now) {
    auto checked = check(safety_case, catalog, store, now);
    if (!checked) {
        return std::move(checked).errors();
    }
    RevalidationReport out;
    out.residual = std::move(checked.value().report);
    out.clean = out.residual.empty();
    return out;
}

}  // namespace dscms
