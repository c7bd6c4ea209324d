#include "dscms/observation.hpp"

#include <array>
#include <tuple>
#include <utility>

namespace dscms {

namespace {

constexpr std::array<std::pair<EvidenceSource, std::string_view>, 8> kSourceNames{{
    {EvidenceSource::incidents, "incidents"},
    {EvidenceSource::near_misses, "near-misses"},
    {EvidenceSource::cyber_threat_intelligence, "cyber-threat-intelligence"},
    {EvidenceSource::research_insights, "research-insights"},
    {EvidenceSource::industry_bodies, "industry-bodies"},
    {EvidenceSource::internal_evaluations, "internal-evaluations"},
    {EvidenceSource::scaling_laws, "scaling-laws"},
    {EvidenceSource::external_evaluations, "external-evaluations"},
}};

}  // namespace

std::string_view to_string(EvidenceSource source) {
    for (const auto& [value, name] : kSourceNames) {
        if (value == source) {
            return name;
        }
    }
    return "unknown";
}

std::optional<EvidenceSource> parse_evidence_source(std::string_view text) {
    for (const auto& [value, name] : kSourceNames) {
        if (name == text) {
            return value;
        }
    }
    return std::nullopt;
}

Json to_json(const Observation& obs) {
    Json j;
    j["ts"] = format_timestamp(obs.ts);
    j["spi"] = obs.spi;
    j["value"] = obs.value;
    j["source"] = to_string(obs.source);
    if (!obs.meta.empty()) {
        Json meta = Json::object();
        for (const auto& [k, v] : obs.meta) {
            meta[k] = v;
        }
        j["meta"] = std::move(meta);
    }
    return j;
}

bool ObservationOrder::operator()(const Observation& a, const Observation& b) const {
    return std::tie(a.ts, a.value, a.meta) < std::tie(b.ts, b.value, b.meta);
}

bool ObservationStore::add(Observation obs) {
    auto& series = by_spi_[obs.spi];
    const bool inserted = series.insert(std::move(obs)).second;
    if (inserted) {
        ++size_;
    }
    return inserted;
}

std::vector<Observation> ObservationStore::for_spi(std::string_view spi) const {
    const auto it = by_spi_.find(spi);
    if (it == by_spi_.end()) {
        return {};
    }
    return {it->second.begin(), it->second.end()};
}

std::vector<std::string> ObservationStore::spis() const {
    std::vector<std::string> out;
    out.reserve(by_spi_.size());
    for (const auto& [id, series] : by_spi_) {
        out.push_back(id);
    }
    return out;
}

std::vector<Observation> ObservationStore::all() const {
    std::vector<Observation> out;
    out.reserve(size_);
    for (const auto& [id, series] : by_spi_) {
        out.insert(out.end(), series.begin(), series.end());
    }
    return out;
}

}  // namespace dscms
