#include "dscms/fixtures.hpp"

#include "json_io.hpp"

namespace dscms::fixtures {

std::optional<std::string_view> file(std::string_view relative_path) {
    for (const auto& [path, bytes] : detail::embedded_table()) {
        if (path == relative_path) {
            return bytes;
        }
    }
    return std::nullopt;
}

std::vector<std::string> list(std::string_view prefix) {
    std::vector<std::string> out;
    for (const auto& [path, bytes] : detail::embedded_table()) {
        if (path.substr(0, prefix.size()) == prefix) {
            out.emplace_back(path);
        }
    }
    return out;
}

Result<SafetyCase> cyber_case() {
    const auto doc = file("case/cyber_inability.json");
    if (!doc) {
        return Error::make("missing-fixture", "bundled case is missing");
    }
    return parse_case(*doc);
}

std::vector<std::string> catalog_documents() {
    std::vector<std::string> out;
    for (const auto& path : list("catalog/")) {
        out.emplace_back(*file(path));
    }
    return out;
}

Result<SpiCatalog> cyber_catalog(Timestamp loaded_at) {
    const auto docs = catalog_documents();
    return load_catalog(docs, loaded_at);
}

Result<Scenario> scenario(std::string_view name) {
    const auto index_doc = file("scenarios/index.json");
    if (!index_doc) {
        return Error::make("missing-fixture", "scenario index is missing");
    }
    auto index = dscms::detail::parse_document(*index_doc, "scenario index");
    if (!index) {
        return std::move(index).errors();
    }
    for (const auto& entry : index.value()) {
        if (entry.value("name", "") != name) {
            continue;
        }
        Scenario s;
        s.name = std::string(name);
        s.title = entry.value("title", "");
        const auto trigger = parse_timestamp(entry.value("trigger", ""));
        if (!trigger) {
            return Error::make("bad-fixture", "scenario trigger is not a timestamp", s.name);
        }
        s.trigger = *trigger;
        const auto obs_text = file(entry.value("observations", ""));
        if (!obs_text) {
            return Error::make("missing-fixture", "scenario observations are missing", s.name);
        }
        auto parsed = parse_observations(*obs_text);
        if (!parsed.errors.empty()) {
            return Error::make("bad-fixture", parsed.errors.front().message,
                               s.name + ":" + std::to_string(parsed.errors.front().line));
        }
        s.observations = std::move(parsed.observations);
        return s;
    }
    return Error::make("unknown-scenario", "no bundled scenario named '" + std::string(name) + "'",
                       std::string(name));
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    const auto index_doc = file("scenarios/index.json");
    if (!index_doc) {
        return out;
    }
    auto index = dscms::detail::parse_document(*index_doc, "scenario index");
    if (!index) {
        return out;
    }
    for (const auto& entry : index.value()) {
        out.push_back(entry.value("name", ""));
    }
    return out;
}

}  // namespace dscms::fixtures
