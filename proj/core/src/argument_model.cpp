#include "dscms/argument_model.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <array>
#include <deque>
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

constexpr std::array<std::pair<NodeKind, std::string_view>, 5> kKinds{{
    {NodeKind::claim, "claim"},
    {NodeKind::strategy, "strategy"},
    {NodeKind::evidence, "evidence"},
    {NodeKind::context, "context"},
    {NodeKind::defeater, "defeater"},
}};

constexpr std::array<std::pair<NodeStatus, std::string_view>, 4> kStatuses{{
    {NodeStatus::valid, "valid"},
    {NodeStatus::invalidated, "invalidated"},
    {NodeStatus::under_review, "under-review"},
    {NodeStatus::stale, "stale"},
}};

constexpr std::array<std::pair<RelKind, std::string_view>, 3> kRels{{
    {RelKind::supports, "supports"},
    {RelKind::in_context_of, "in-context-of"},
    {RelKind::challenges, "challenges"},
}};

constexpr std::array<std::pair<PropagationPolicy, std::string_view>, 3> kPolicies{{
    {PropagationPolicy::invalidate, "invalidate"},
    {PropagationPolicy::flag, "flag"},
    {PropagationPolicy::spi_gated, "spi-gated"},
}};

std::string edge_label(const Relationship& e) {
    return e.from + "->" + e.to;
}

/// Parent lists over supports edges whose endpoints both exist.
std::map<std::string, std::vector<std::string>, std::less<>> supports_parents(const SafetyCase& c) {
    std::map<std::string, std::vector<std::string>, std::less<>> parents;
    for (const auto& e : c.edges()) {
        if (e.rel == RelKind::supports && c.contains(e.from) && c.contains(e.to)) {
            parents[e.from].push_back(e.to);
        }
    }
    return parents;
}

/// Kahn's algorithm restricted to `members`, emitting children before parents
/// and breaking ties lexicographically. Returns the emitted order; nodes on a
/// cycle are left out.
std::vector<std::string> children_first_order(const SafetyCase& c, const std::set<std::string>& members) {
    std::map<std::string, int> pending_children;
    std::map<std::string, std::vector<std::string>> parents;
    for (const auto& id : members) {
        pending_children[id] = 0;
    }
    for (const auto& e : c.edges()) {
        if (e.rel == RelKind::supports && members.contains(e.from) && members.contains(e.to) && e.from != e.to) {
            ++pending_children[e.to];
            parents[e.from].push_back(e.to);
        }
    }
    std::set<std::string> ready;
    for (const auto& [id, count] : pending_children) {
        if (count == 0) {
            ready.insert(id);
        }
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        const std::string id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& parent : parents[id]) {
            if (--pending_children[parent] == 0) {
                ready.insert(parent);
            }
        }
    }
    return order;
}

}  // namespace

std::string_view to_string(NodeKind kind) { return name_of(kKinds, kind); }
std::string_view to_string(NodeStatus status) { return name_of(kStatuses, status); }
std::string_view to_string(RelKind rel) { return name_of(kRels, rel); }
std::string_view to_string(PropagationPolicy policy) { return name_of(kPolicies, policy); }
std::optional<NodeKind> parse_node_kind(std::string_view text) { return value_of(kKinds, text); }
std::optional<NodeStatus> parse_node_status(std::string_view text) { return value_of(kStatuses, text); }
std::optional<RelKind> parse_rel_kind(std::string_view text) { return value_of(kRels, text); }
std::optional<PropagationPolicy> parse_policy(std::string_view text) { return value_of(kPolicies, text); }

PropagationPolicy default_policy(RelKind rel, NodeKind from_kind) {
    switch (rel) {
        case RelKind::supports:
            return from_kind == NodeKind::evidence ? PropagationPolicy::invalidate : PropagationPolicy::flag;
        case RelKind::in_context_of:
            return PropagationPolicy::flag;
        case RelKind::challenges:
            return PropagationPolicy::invalidate;
    }
    return PropagationPolicy::flag;
}

// ---------------------------------------------------------------- SafetyCase

SafetyCase SafetyCase::from_parts(std::string case_id, int version, std::vector<ArgNode> nodes,
                                  std::vector<Relationship> edges, std::vector<SpiAttachment> attachments,
                                  std::vector<Revision> revisions) {
    SafetyCase c;
    c.case_id_ = std::move(case_id);
    c.version_ = version;
    for (auto& n : nodes) {
        std::string id = n.id;
        c.nodes_.insert_or_assign(std::move(id), std::move(n));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    c.edges_ = std::move(edges);
    std::sort(attachments.begin(), attachments.end());
    attachments.erase(std::unique(attachments.begin(), attachments.end()), attachments.end());
    c.attachments_ = std::move(attachments);
    c.revisions_ = std::move(revisions);
    return c;
}

const ArgNode* SafetyCase::find(std::string_view id) const {
    const auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::optional<std::string> SafetyCase::top_id() const {
    std::optional<std::string> top;
    for (const auto& [id, node] : nodes_) {
        if (node.has_tag(kTopTag)) {
            if (top) {
                return std::nullopt;
            }
            top = id;
        }
    }
    return top;
}

std::vector<std::string> SafetyCase::spis_of(std::string_view node_id) const {
    std::vector<std::string> out;
    for (const auto& a : attachments_) {
        if (a.claim_id == node_id) {
            out.push_back(a.spi_id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::string> SafetyCase::node_of_spi(std::string_view spi_id) const {
    for (const auto& a : attachments_) {
        if (a.spi_id == spi_id) {
            return a.claim_id;
        }
    }
    return std::nullopt;
}

NodeStatus SafetyCase::status_of(std::string_view id) const {
    const ArgNode* n = find(id);
    return n == nullptr ? NodeStatus::valid : n->status;
}

SafetyCase SafetyCase::with_statuses(const std::map<std::string, NodeStatus>& statuses) const {
    SafetyCase copy = *this;
    for (const auto& [id, status] : statuses) {
        const auto it = copy.nodes_.find(id);
        if (it != copy.nodes_.end()) {
            it->second.status = status;
        }
    }
    return copy;
}

SafetyCase SafetyCase::with_all_valid() const {
    SafetyCase copy = *this;
    for (auto& [id, node] : copy.nodes_) {
        node.status = NodeStatus::valid;
    }
    return copy;
}

// ---------------------------------------------------------------- validation

std::vector<Violation> validate_structure(const SafetyCase& c) {
    std::vector<Violation> out;

    std::vector<std::string> tops;
    for (const auto& [id, node] : c.nodes()) {
        if (id.empty()) {
            out.push_back({"empty-id", id});
        }
        if (node.has_tag(kTopTag)) {
            tops.push_back(id);
        }
    }
    if (tops.empty()) {
        out.push_back({"missing-top-claim", c.case_id()});
    } else if (tops.size() > 1) {
        for (const auto& id : tops) {
            out.push_back({"multiple-top-claims", id});
        }
    } else if (c.find(tops.front())->kind != NodeKind::claim) {
        out.push_back({"top-not-claim", tops.front()});
    }

    for (const auto& e : c.edges()) {
        const ArgNode* from = c.find(e.from);
        const ArgNode* to = c.find(e.to);
        if (from == nullptr || to == nullptr) {
            out.push_back({"dangling-edge", edge_label(e)});
            continue;
        }
        if (e.from == e.to) {
            out.push_back({"self-loop", edge_label(e)});
        }
        if (e.rel == RelKind::challenges && from->kind != NodeKind::defeater) {
            out.push_back({"bad-challenges-source", edge_label(e)});
        }
    }

    std::set<std::string> seen_spis;
    for (const auto& a : c.attachments()) {
        const ArgNode* n = c.find(a.claim_id);
        if (n == nullptr || n->kind != NodeKind::claim) {
            out.push_back({"dangling-attachment", a.spi_id});
        }
        if (!seen_spis.insert(a.spi_id).second) {
            out.push_back({"duplicate-attachment", a.spi_id});
        }
    }

    std::set<std::string> all_ids;
    for (const auto& [id, node] : c.nodes()) {
        all_ids.insert(id);
    }
    const auto order = children_first_order(c, all_ids);
    if (order.size() != all_ids.size()) {
        std::set<std::string> on_cycle = all_ids;
        for (const auto& id : order) {
            on_cycle.erase(id);
        }
        out.push_back({"cyclic-supports-graph", *on_cycle.begin()});
    }

    if (tops.size() == 1) {
        std::map<std::string, std::vector<std::string>> children;
        for (const auto& e : c.edges()) {
            if (e.rel == RelKind::supports && c.contains(e.from) && c.contains(e.to)) {
                children[e.to].push_back(e.from);
            }
        }
        std::set<std::string> reached{tops.front()};
        std::deque<std::string> queue{tops.front()};
        while (!queue.empty()) {
            const std::string id = queue.front();
            queue.pop_front();
            for (const auto& child : children[id]) {
                if (reached.insert(child).second) {
                    queue.push_back(child);
                }
            }
        }
        for (const auto& [id, node] : c.nodes()) {
            if (node.kind == NodeKind::claim && !reached.contains(id)) {
                out.push_back({"unreachable-from-top", id});
            }
        }
    }

    std::sort(out.begin(), out.end());
    return out;
}

Result<std::vector<std::string>> ancestors(const SafetyCase& c, std::string_view id) {
    if (!c.contains(id)) {
        return Error::make("unknown-node", "no node with id '" + std::string(id) + "'", std::string(id));
    }
    const auto parents = supports_parents(c);
    std::set<std::string> found;
    std::deque<std::string> queue{std::string(id)};
    while (!queue.empty()) {
        const std::string current = queue.front();
        queue.pop_front();
        const auto it = parents.find(current);
        if (it == parents.end()) {
            continue;
        }
        for (const auto& parent : it->second) {
            if (parent != id && found.insert(parent).second) {
                queue.push_back(parent);
            }
        }
    }
    return children_first_order(c, found);
}

// ---------------------------------------------------------------- documents

Result<SafetyCase> parse_case(std::string_view document) {
    auto parsed = detail::parse_document(document, "case document");
    if (!parsed) {
        return std::move(parsed).errors();
    }
    return case_from_json(parsed.value());
}

Result<SafetyCase> case_from_json(const Json& doc) {
    std::vector<Error> errors;
    detail::FieldReader top(doc, "case");
    const auto case_id = top.string("case_id");
    const auto version = top.has("version") ? top.integer("version") : std::optional<long>{1};
    if (version && *version < 1) {
        top.fail("bad-field", "version must be positive");
    }
    for (auto& e : top.take_errors()) {
        errors.push_back(std::move(e));
    }

    std::vector<ArgNode> nodes;
    std::set<std::string> ids;
    const Json empty = Json::array();
    const Json& node_docs = doc.is_object() && doc.contains("nodes") ? doc.at("nodes") : empty;
    if (!node_docs.is_array()) {
        errors.push_back(Error::make("bad-field", "nodes must be a list", "case"));
    } else {
        for (std::size_t i = 0; i < node_docs.size(); ++i) {
            detail::FieldReader r(node_docs[i], "nodes[" + std::to_string(i) + "]");
            ArgNode node;
            const auto id = r.string("id");
            const auto kind = r.string("kind");
            const auto text = r.string("text", false);
            const auto tags = r.string_list("tags", false);
            const auto status = r.string("status", false);
            if (id) {
                node.id = *id;
                if (id->empty()) {
                    r.fail("empty-id", "node id must be non-empty");
                } else if (!ids.insert(*id).second) {
                    r.fail("duplicate-id", "duplicate node id '" + *id + "'");
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
            if (status) {
                if (const auto s = parse_node_status(*status)) {
                    node.status = *s;
                } else {
                    r.fail("unknown-status", "unknown node status '" + *status + "'");
                }
            }
            for (auto& e : r.take_errors()) {
                errors.push_back(std::move(e));
            }
            nodes.push_back(std::move(node));
        }
    }

    std::map<std::string, NodeKind> kinds;
    for (const auto& n : nodes) {
        kinds.emplace(n.id, n.kind);
    }

    std::vector<Relationship> edges;
    const Json& edge_docs = doc.is_object() && doc.contains("edges") ? doc.at("edges") : empty;
    if (!edge_docs.is_array()) {
        errors.push_back(Error::make("bad-field", "edges must be a list", "case"));
    } else {
        for (std::size_t i = 0; i < edge_docs.size(); ++i) {
            detail::FieldReader r(edge_docs[i], "edges[" + std::to_string(i) + "]");
            const auto from = r.string("from");
            const auto to = r.string("to");
            const auto rel = r.string("rel");
            const auto policy = r.string("policy", false);
            Relationship edge;
            if (from && to) {
                edge.from = *from;
                edge.to = *to;
                if (!kinds.contains(*from) || !kinds.contains(*to)) {
                    r.fail("dangling-edge", "edge " + *from + "->" + *to + " references an unknown node");
                }
            }
            if (rel) {
                if (const auto k = parse_rel_kind(*rel)) {
                    edge.rel = *k;
                } else {
                    r.fail("unknown-rel", "unknown relationship '" + *rel + "'");
                }
            }
            if (policy) {
                if (const auto p = parse_policy(*policy)) {
                    edge.policy = *p;
                } else {
                    r.fail("unknown-policy", "unknown propagation policy '" + *policy + "'");
                }
            } else if (from) {
                const auto k = kinds.find(*from);
                edge.policy = default_policy(edge.rel, k == kinds.end() ? NodeKind::claim : k->second);
            }
            for (auto& e : r.take_errors()) {
                errors.push_back(std::move(e));
            }
            edges.push_back(std::move(edge));
        }
    }

    std::vector<SpiAttachment> attachments;
    const Json& att_docs = doc.is_object() && doc.contains("spi_attachments") ? doc.at("spi_attachments") : empty;
    if (!att_docs.is_array()) {
        errors.push_back(Error::make("bad-field", "spi_attachments must be a list", "case"));
    } else {
        for (std::size_t i = 0; i < att_docs.size(); ++i) {
            detail::FieldReader r(att_docs[i], "spi_attachments[" + std::to_string(i) + "]");
            const auto spi = r.string("spi_id");
            const auto claim = r.string("claim_id");
            if (spi && claim) {
                attachments.push_back({*spi, *claim});
            }
            for (auto& e : r.take_errors()) {
                errors.push_back(std::move(e));
            }
        }
    }

    std::vector<Revision> revisions;
    if (doc.is_object() && doc.contains("revisions")) {
        const Json& rev_docs = doc.at("revisions");
        if (!rev_docs.is_array()) {
            errors.push_back(Error::make("bad-field", "revisions must be a list", "case"));
        } else {
            for (std::size_t i = 0; i < rev_docs.size(); ++i) {
                detail::FieldReader r(rev_docs[i], "revisions[" + std::to_string(i) + "]");
                Revision rev;
                rev.version = static_cast<int>(r.integer("version").value_or(0));
                rev.at = r.string("at", false).value_or("");
                if (rev_docs[i].is_object() && rev_docs[i].contains("actions")) {
                    rev.actions = rev_docs[i].at("actions");
                }
                for (auto& e : r.take_errors()) {
                    errors.push_back(std::move(e));
                }
                revisions.push_back(std::move(rev));
            }
        }
    }

    if (!errors.empty()) {
        return errors;
    }

    SafetyCase c = SafetyCase::from_parts(*case_id, static_cast<int>(*version), std::move(nodes), std::move(edges),
                                          std::move(attachments), std::move(revisions));
    for (const auto& v : validate_structure(c)) {
        std::string message = v.code;
        std::replace(message.begin(), message.end(), '-', ' ');
        errors.push_back(Error::make(v.code, message, v.element));
    }
    if (!errors.empty()) {
        return errors;
    }
    return c;
}

Json to_json(const SafetyCase& c) {
    Json doc;
    doc["case_id"] = c.case_id();
    doc["version"] = c.version();
    Json nodes = Json::array();
    for (const auto& [id, node] : c.nodes()) {
        Json n;
        n["id"] = node.id;
        n["kind"] = to_string(node.kind);
        n["text"] = node.text;
        n["tags"] = Json(std::vector<std::string>(node.tags.begin(), node.tags.end()));
        if (node.status != NodeStatus::valid) {
            n["status"] = to_string(node.status);
        }
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (const auto& e : c.edges()) {
        Json j;
        j["from"] = e.from;
        j["to"] = e.to;
        j["rel"] = to_string(e.rel);
        j["policy"] = to_string(e.policy);
        edges.push_back(std::move(j));
    }
    doc["edges"] = std::move(edges);
    Json atts = Json::array();
    for (const auto& a : c.attachments()) {
        atts.push_back(Json{{"spi_id", a.spi_id}, {"claim_id", a.claim_id}});
    }
    doc["spi_attachments"] = std::move(atts);
    if (!c.revisions().empty()) {
        Json revs = Json::array();
        for (const auto& r : c.revisions()) {
            Json j;
            j["version"] = r.version;
            j["at"] = r.at;
            j["actions"] = r.actions;
            revs.push_back(std::move(j));
        }
        doc["revisions"] = std::move(revs);
    }
    return doc;
}

std::string serialize_case(const SafetyCase& c) {
    return to_json(c).dump(2) + "\n";
}

}  // namespace dscms
