#include "dscms/traceability.hpp"

#include <algorithm>
#include <set>

namespace dscms {

std::vector<Violation> validate_traceability(const SafetyCase& safety_case, const SpiCatalog& catalog) {
    std::vector<Violation> out;

    for (const auto& [id, spi] : catalog.defs()) {
        const ArgNode* claim = safety_case.find(spi.claim);
        if (claim == nullptr || claim->kind != NodeKind::claim) {
            out.push_back({"dangling-spi-claim", id});
            continue;
        }
        const auto attached_to = safety_case.node_of_spi(id);
        if (!attached_to) {
            out.push_back({"unattached-spi", id});
        } else if (*attached_to != spi.claim) {
            out.push_back({"attachment-mismatch", id});
        }
    }
    for (const auto& a : safety_case.attachments()) {
        if (catalog.find(a.spi_id) == nullptr) {
            out.push_back({"unknown-attached-spi", a.spi_id});
        }
    }

    // A claim supported by anything, evidence included, is not a leaf.
    std::set<std::string> has_supporter;
    for (const auto& e : safety_case.edges()) {
        if (e.rel == RelKind::supports) {
            has_supporter.insert(e.to);
        }
    }
    for (const auto& [id, node] : safety_case.nodes()) {
        if (node.kind == NodeKind::claim && !has_supporter.contains(id) && safety_case.spis_of(id).empty()) {
            out.push_back({"untraced-leaf", id});
        }
    }

    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace dscms
