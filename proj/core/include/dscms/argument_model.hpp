#pragma once

#include "dscms/json.hpp"
#include "dscms/result.hpp"

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dscms {

enum class NodeKind { claim, strategy, evidence, context, defeater };
enum class NodeStatus { valid, invalidated, under_review, stale };
enum class RelKind { supports, in_context_of, challenges };
enum class PropagationPolicy { invalidate, flag, spi_gated };

[[nodiscard]] std::string_view to_string(NodeKind kind);
[[nodiscard]] std::string_view to_string(NodeStatus status);
[[nodiscard]] std::string_view to_string(RelKind rel);
[[nodiscard]] std::string_view to_string(PropagationPolicy policy);
[[nodiscard]] std::optional<NodeKind> parse_node_kind(std::string_view text);
[[nodiscard]] std::optional<NodeStatus> parse_node_status(std::string_view text);
[[nodiscard]] std::optional<RelKind> parse_rel_kind(std::string_view text);
[[nodiscard]] std::optional<PropagationPolicy> parse_policy(std::string_view text);

/// Tag marking the single top-level claim.
inline constexpr std::string_view kTopTag = "top";
/// Prefix of tags that bind a node to a development artifact reference.
inline constexpr std::string_view kArtifactTagPrefix = "artifact:";

struct ArgNode {
    std::string id;
    NodeKind kind = NodeKind::claim;
    std::string text;
    std::set<std::string> tags;
    NodeStatus status = NodeStatus::valid;

    [[nodiscard]] bool has_tag(std::string_view tag) const { return tags.contains(std::string(tag)); }
    friend bool operator==(const ArgNode&, const ArgNode&) = default;
};

struct Relationship {
    std::string from;
    std::string to;
    RelKind rel = RelKind::supports;
    PropagationPolicy policy = PropagationPolicy::flag;

    friend auto operator<=>(const Relationship&, const Relationship&) = default;
};

/// Policy applied when a document omits it for an edge.
[[nodiscard]] PropagationPolicy default_policy(RelKind rel, NodeKind from_kind);

struct SpiAttachment {
    std::string spi_id;
    std::string claim_id;

    friend auto operator<=>(const SpiAttachment&, const SpiAttachment&) = default;
};

/// One entry of the change history carried with the case.
struct Revision {
    int version = 1;
    std::string at;
    Json actions = Json::array();

    friend bool operator==(const Revision&, const Revision&) = default;
};

/// A versioned argument graph. Immutable once built; edits produce a new value.
class SafetyCase {
public:
    SafetyCase() = default;

    /// Assembles a case without validation; normalizes element ordering.
    [[nodiscard]] static SafetyCase from_parts(std::string case_id, int version, std::vector<ArgNode> nodes,
                                               std::vector<Relationship> edges,
                                               std::vector<SpiAttachment> attachments,
                                               std::vector<Revision> revisions = {});

    [[nodiscard]] const std::string& case_id() const noexcept { return case_id_; }
    [[nodiscard]] int version() const noexcept { return version_; }
    [[nodiscard]] const std::map<std::string, ArgNode, std::less<>>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<Relationship>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<SpiAttachment>& attachments() const noexcept { return attachments_; }
    [[nodiscard]] const std::vector<Revision>& revisions() const noexcept { return revisions_; }

    [[nodiscard]] const ArgNode* find(std::string_view id) const;
    [[nodiscard]] bool contains(std::string_view id) const { return find(id) != nullptr; }
    /// Id of the node tagged top, if exactly one exists.
    [[nodiscard]] std::optional<std::string> top_id() const;
    /// Indicator ids attached to a node, sorted.
    [[nodiscard]] std::vector<std::string> spis_of(std::string_view node_id) const;
    /// Node carrying an attachment for the indicator.
    [[nodiscard]] std::optional<std::string> node_of_spi(std::string_view spi_id) const;
    [[nodiscard]] NodeStatus status_of(std::string_view id) const;

    /// Copy with node statuses replaced; unspecified nodes keep their status.
    [[nodiscard]] SafetyCase with_statuses(const std::map<std::string, NodeStatus>& statuses) const;
    /// Copy with every status reset to valid.
    [[nodiscard]] SafetyCase with_all_valid() const;

    friend bool operator==(const SafetyCase&, const SafetyCase&) = default;

private:
    std::string case_id_;
    int version_ = 1;
    std::map<std::string, ArgNode, std::less<>> nodes_;
    std::vector<Relationship> edges_;
    std::vector<SpiAttachment> attachments_;
    std::vector<Revision> revisions_;
};

struct Violation {
    std::string code;
    std::string element;

    friend auto operator<=>(const Violation&, const Violation&) = default;
};

[[nodiscard]] Result<SafetyCase> parse_case(std::string_view document);
[[nodiscard]] Result<SafetyCase> case_from_json(const Json& document);

/// Checks every structural invariant. Empty result means the case is sound.
[[nodiscard]] std::vector<Violation> validate_structure(const SafetyCase& safety_case);

/// Nodes reachable from `id` over supports edges toward the top, children
/// before parents, ending at the top claim.
[[nodiscard]] Result<std::vector<std::string>> ancestors(const SafetyCase& safety_case, std::string_view id);

[[nodiscard]] Json to_json(const SafetyCase& safety_case);
/// Byte-deterministic document for the case.
[[nodiscard]] std::string serialize_case(const SafetyCase& safety_case);

}  // namespace dscms
