#include "dscms/consistency.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <set>

namespace dscms {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json node_json(const ArgNode& node) {
    Json n;
    n["id"] = node.id;
    n["kind"] = to_string(node.kind);
    n["text"] = node.text;
    n["tags"] = Json(std::vector<std::string>(node.tags.begin(), node.tags.end()));
    return n;
}

Result<ArgNode> node_from_json(const Json& doc, const std::string& location) {
    detail::FieldReader r(doc, location);
    ArgNode node;
    const auto id = r.string("id");
    const auto kind = r.string("kind");
    const auto text = r.string("text", false);
    const auto tags = r.string_list("tags", false);
    if (id) {
        node.id = *id;
        if (id->empty()) {
            r.fail("empty-id", "node id must be non-empty");
        }
    }
    if (kind) {
        if (const auto k = parse_node_kind(*kind)) {
            node.kind = *k;
        } else {
            r.fail("unknown-kind", "unknown node kind '" + *kind + "'");
        }
    }
    node.text = text.value_or("");
    if (tags) {
        node.tags = {tags->begin(), tags->end()};
    }
    if (!r.errors().empty()) {
        return r.take_errors();
    }
    return node;
}

}  // namespace

Json to_json(const RecoveryAction& action) {
    return std::visit(
        Overloaded{
            [](const AddNode& a) { return Json{{"action", "add_node"}, {"node", node_json(a.node)}}; },
            [](const AddEdge& a) {
                Json edge{{"from", a.from}, {"to", a.to}, {"rel", to_string(a.rel)}};
                if (a.policy) {
                    edge["policy"] = to_string(*a.policy);
                }
                return Json{{"action", "add_edge"}, {"edge", edge}};
            },
            [](const SetThreshold& a) {
                Json j{{"action", "set_threshold"}, {"spi", a.spi}};
                j["threshold"] = a.threshold.is_trend_only() ? Json("trend_only") : Json(*a.threshold.value());
                j["comparator"] = to_string(a.comparator);
                return j;
            },
            [](const Reinstate& a) { return Json{{"action", "reinstate"}, {"node", a.node}}; },
            [](const AttachEvidence& a) {
                return Json{{"action", "attach_evidence"}, {"node", a.node}, {"evidence", node_json(a.evidence)}};
            },
        },
        action);
}

Result<std::vector<RecoveryAction>> parse_recovery_actions(const Json& actions) {
    if (!actions.is_array()) {
        return Error::make("bad-document", "recovery actions must be a list");
    }
    std::vector<RecoveryAction> out;
    std::vector<Error> errors;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const std::string loc = "actions[" + std::to_string(i) + "]";
        const Json& a = actions[i];
        detail::FieldReader r(a, loc);
        const auto kind = r.string("action");
        if (!kind) {
            auto errs = r.take_errors();
            errors.insert(errors.end(), errs.begin(), errs.end());
            continue;
        }
        if (*kind == "add_node") {
            if (!a.contains("node")) {
                r.fail("missing-field", "missing field 'node'");
            } else if (auto node = node_from_json(a.at("node"), loc + ".node")) {
                out.emplace_back(AddNode{std::move(node).value()});
            } else {
                errors.insert(errors.end(), node.errors().begin(), node.errors().end());
            }
        } else if (*kind == "add_edge") {
            if (!a.contains("edge")) {
                r.fail("missing-field", "missing field 'edge'");
            } else {
                detail::FieldReader er(a.at("edge"), loc + ".edge");
                AddEdge edge;
                edge.from = er.string("from").value_or("");
                edge.to = er.string("to").value_or("");
                if (const auto rel = er.string("rel")) {
                    if (const auto k = parse_rel_kind(*rel)) {
                        edge.rel = *k;
                    } else {
                        er.fail("unknown-rel", "unknown relationship '" + *rel + "'");
                    }
                }
                if (const auto policy = er.string("policy", false)) {
                    if (const auto p = parse_policy(*policy)) {
                        edge.policy = *p;
                    } else {
                        er.fail("unknown-policy", "unknown propagation policy '" + *policy + "'");
                    }
                }
                if (er.errors().empty()) {
                    out.emplace_back(std::move(edge));
                } else {
                    auto errs = er.take_errors();
                    errors.insert(errors.end(), errs.begin(), errs.end());
                }
            }
        } else if (*kind == "set_threshold") {
            SetThreshold st;
            st.spi = r.string("spi").value_or("");
            if (const auto cmp = r.string("comparator")) {
                if (const auto c = parse_comparator(*cmp)) {
                    st.comparator = *c;
                } else {
                    r.fail("unknown-comparator", "unknown comparator '" + *cmp + "'");
                }
            }
            if (!a.is_object() || !a.contains("threshold")) {
                r.fail("missing-field", "missing field 'threshold'");
            } else if (a.at("threshold").is_string() && a.at("threshold").get<std::string>() == "trend_only") {
                st.threshold = Threshold::trend_only();
            } else if (a.at("threshold").is_number()) {
                st.threshold = Threshold::numeric(a.at("threshold").get<double>());
            } else {
                r.fail("bad-threshold", "threshold must be a number or 'trend_only'");
            }
            if (r.errors().empty()) {
                out.emplace_back(std::move(st));
            }
        } else if (*kind == "reinstate") {
            if (const auto node = r.string("node")) {
                out.emplace_back(Reinstate{*node});
            }
        } else if (*kind == "attach_evidence") {
            const auto node = r.string("node");
            if (!a.contains("evidence")) {
                r.fail("missing-field", "missing field 'evidence'");
            } else if (auto ev = node_from_json(a.at("evidence"), loc + ".evidence")) {
                if (node) {
                    out.emplace_back(AttachEvidence{*node, std::move(ev).value()});
                }
            } else {
                errors.insert(errors.end(), ev.errors().begin(), ev.errors().end());
            }
        } else {
            r.fail("unknown-action", "unknown recovery action '" + *kind + "'");
        }
        auto errs = r.take_errors();
        errors.insert(errors.end(), errs.begin(), errs.end());
    }
    if (!errors.empty()) {
        return errors;
    }
    return out;
}

Result<RecoveryOutcome> apply_recovery(const SafetyCase& safety_case, const SpiCatalog& catalog,
                                       std::span<const RecoveryAction> actions, Timestamp at) {
    if (actions.empty()) {
        return Error::make("empty-recovery", "a recovery batch needs at least one action");
    }
    std::vector<ArgNode> nodes;
    for (const auto& [id, node] : safety_case.nodes()) {
        nodes.push_back(node);
    }
    std::vector<Relationship> edges = safety_case.edges();
    SpiCatalog next_catalog = catalog;
    std::vector<Error> errors;

    const auto find_node = [&](const std::string& id) -> ArgNode* {
        const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const ArgNode& n) { return n.id == id; });
        return it == nodes.end() ? nullptr : &*it;
    };
    const auto add_node = [&](ArgNode node, const std::string& loc) {
        if (node.id.empty()) {
            errors.push_back(Error::make("empty-id", "node id must be non-empty", loc));
        } else if (find_node(node.id) != nullptr) {
            errors.push_back(Error::make("duplicate-id", "node '" + node.id + "' already exists", loc));
        } else {
            node.status = NodeStatus::valid;
            nodes.push_back(std::move(node));
        }
    };
    const auto add_edge = [&](Relationship edge, const std::string& loc) {
        if (std::find(edges.begin(), edges.end(), edge) != edges.end()) {
            errors.push_back(Error::make("duplicate-edge", "edge " + edge.from + "->" + edge.to + " already exists", loc));
        } else {
            edges.push_back(std::move(edge));
        }
    };

    Json applied = Json::array();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const std::string loc = "actions[" + std::to_string(i) + "]";
        applied.push_back(to_json(actions[i]));
        std::visit(
            Overloaded{
                [&](const AddNode& a) { add_node(a.node, loc); },
                [&](const AddEdge& a) {
                    const ArgNode* from = find_node(a.from);
                    Relationship edge{a.from, a.to, a.rel, PropagationPolicy::flag};
                    edge.policy = a.policy ? *a.policy
                                           : default_policy(a.rel, from != nullptr ? from->kind : NodeKind::claim);
                    add_edge(std::move(edge), loc);
                },
                [&](const SetThreshold& a) {
                    const SpiDef* spi = next_catalog.find(a.spi);
                    if (spi == nullptr) {
                        errors.push_back(Error::make("unknown-spi", "indicator '" + a.spi + "' is not in the catalog", loc));
                        return;
                    }
                    SpiDef updated = *spi;
                    updated.threshold = a.threshold;
                    updated.comparator = a.comparator;
                    next_catalog.replace(std::move(updated));
                },
                [&](const Reinstate& a) {
                    ArgNode* node = find_node(a.node);
                    if (node == nullptr) {
                        errors.push_back(Error::make("unknown-node", "no node with id '" + a.node + "'", loc));
                        return;
                    }
                    node->status = NodeStatus::valid;
                    for (const auto& spi_id : safety_case.spis_of(a.node)) {
                        if (const SpiDef* spi = next_catalog.find(spi_id)) {
                            SpiDef updated = *spi;
                            updated.baseline = at;
                            next_catalog.replace(std::move(updated));
                        }
                    }
                },
                [&](const AttachEvidence& a) {
                    if (find_node(a.node) == nullptr) {
                        errors.push_back(Error::make("unknown-node", "no node with id '" + a.node + "'", loc));
                        return;
                    }
                    if (a.evidence.kind != NodeKind::evidence) {
                        errors.push_back(Error::make("bad-evidence", "attached node must have kind evidence", loc));
                        return;
                    }
                    add_node(a.evidence, loc);
                    add_edge({a.evidence.id, a.node, RelKind::supports,
                              default_policy(RelKind::supports, NodeKind::evidence)},
                             loc);
                },
            },
            actions[i]);
    }
    if (!errors.empty()) {
        return errors;
    }

    const int version = safety_case.version() + 1;
    std::vector<Revision> revisions = safety_case.revisions();
    revisions.push_back({version, format_timestamp(at), applied});
    SafetyCase next = SafetyCase::from_parts(safety_case.case_id(), version, std::move(nodes), std::move(edges),
                                             safety_case.attachments(), std::move(revisions));
    for (const auto& v : validate_structure(next)) {
        errors.push_back(Error::make(v.code, "recovery would break the case structure", v.element));
    }
    if (!errors.empty()) {
        return errors;
    }

    Json diff;
    diff["base_version"] = safety_case.version();
    diff["version"] = version;
    diff["at"] = format_timestamp(at);
    diff["actions"] = std::move(applied);
    return RecoveryOutcome{std::move(next), std::move(next_catalog), std::move(diff)};
}

}  // namespace dscms
