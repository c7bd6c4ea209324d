#include "dscms/ingestion.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <cmath>

namespace dscms {

namespace {

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

Result<Observation> observation_from_json(const Json& record) {
    if (!record.is_object()) {
        return Error::make("bad-record", "observation must be an object");
    }
    Observation obs;
    const auto ts_it = record.find("ts");
    if (ts_it == record.end() || !ts_it->is_string()) {
        return Error::make("bad-timestamp", "missing or non-text 'ts'");
    }
    const auto ts = parse_timestamp(ts_it->get<std::string>());
    if (!ts) {
        return Error::make("bad-timestamp", "unparseable timestamp '" + ts_it->get<std::string>() + "'");
    }
    obs.ts = *ts;

    const auto spi_it = record.find("spi");
    if (spi_it == record.end() || !spi_it->is_string() || spi_it->get<std::string>().empty()) {
        return Error::make("missing-field", "missing indicator id 'spi'");
    }
    obs.spi = spi_it->get<std::string>();

    const auto value_it = record.find("value");
    if (value_it == record.end() || !value_it->is_number()) {
        return Error::make("bad-value", "'value' must be a number");
    }
    obs.value = value_it->get<double>();
    if (!std::isfinite(obs.value)) {
        return Error::make("non-finite-value", "'value' is not finite");
    }

    const auto source_it = record.find("source");
    if (source_it == record.end() || !source_it->is_string()) {
        return Error::make("unknown-source", "missing evidence 'source'");
    }
    const auto source = parse_evidence_source(source_it->get<std::string>());
    if (!source) {
        return Error::make("unknown-source", "unknown evidence source '" + source_it->get<std::string>() + "'");
    }
    obs.source = *source;

    if (const auto meta_it = record.find("meta"); meta_it != record.end() && !meta_it->is_null()) {
        if (!meta_it->is_object()) {
            return Error::make("bad-meta", "'meta' must be an object");
        }
        for (const auto& [k, v] : meta_it->items()) {
            obs.meta[k] = detail::scalar_text(v);
        }
    }
    return obs;
}

ParsedObservations parse_observations(std::string_view text) {
    ParsedObservations out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (is_blank(line)) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        Json record;
        try {
            record = Json::parse(line.begin(), line.end());
        } catch (const Json::out_of_range&) {
            out.errors.push_back({line_no, "non-finite-value", "number does not fit a double"});
            continue;
        } catch (const Json::exception&) {
            out.errors.push_back({line_no, "bad-record", "line is not a valid record"});
            continue;
        }
        auto obs = observation_from_json(record);
        if (!obs) {
            out.errors.push_back({line_no, obs.error().code, obs.error().message});
            continue;
        }
        out.observations.push_back(std::move(obs).value());
    }
    return out;
}

std::string format_observations(std::span<const Observation> observations) {
    std::string out;
    for (const auto& obs : observations) {
        out += to_json(obs).dump();
        out += '\n';
    }
    return out;
}

bool FeedMapping::matches(const Json& record) const {
    if (!record.is_object()) {
        return false;
    }
    for (const auto& [field, expected] : match) {
        const auto it = record.find(field);
        if (it == record.end() || detail::scalar_text(*it) != expected) {
            return false;
        }
    }
    return true;
}

Result<std::vector<FeedMapping>> parse_feed_mappings(std::string_view document) {
    auto parsed = detail::parse_document(document, "feed mapping");
    if (!parsed) {
        return std::move(parsed).errors();
    }
    const Json& doc = parsed.value();
    if (!doc.is_array()) {
        return Error::make("bad-document", "feed mapping must be a list");
    }
    std::vector<FeedMapping> out;
    std::vector<Error> errors;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        detail::FieldReader r(doc[i], "mappings[" + std::to_string(i) + "]");
        FeedMapping m;
        const auto source = r.string("source");
        const auto target = r.string("target_spi");
        const auto value_field = r.string("value_field", false);
        if (source) {
            if (const auto s = parse_evidence_source(*source)) {
                m.source = *s;
            } else {
                r.fail("unknown-source", "unknown evidence source '" + *source + "'");
            }
        }
        if (target) {
            m.target_spi = *target;
        }
        m.value_field = value_field;
        if (doc[i].is_object() && doc[i].contains("match") && doc[i].at("match").is_object()) {
            for (const auto& [k, v] : doc[i].at("match").items()) {
                m.match[k] = detail::scalar_text(v);
            }
        } else {
            r.fail("missing-field", "missing 'match' object");
        }
        if (!r.errors().empty()) {
            auto errs = r.take_errors();
            errors.insert(errors.end(), errs.begin(), errs.end());
            continue;
        }
        out.push_back(std::move(m));
    }
    if (!errors.empty()) {
        return errors;
    }
    return out;
}

std::vector<Violation> validate_mappings(std::span<const FeedMapping> mappings, const SpiCatalog& catalog) {
    std::vector<Violation> out;
    for (const auto& m : mappings) {
        if (catalog.find(m.target_spi) == nullptr) {
            out.push_back({"unknown-target-spi", m.target_spi});
        }
    }
    return out;
}

FeedResult map_feed(std::span<const Json> records, std::span<const FeedMapping> mappings) {
    FeedResult out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Json& record = records[i];
        bool matched = false;
        for (const auto& m : mappings) {
            if (!m.matches(record)) {
                continue;
            }
            matched = true;
            const auto ts_it = record.find("ts");
            const auto ts = ts_it != record.end() && ts_it->is_string()
                                ? parse_timestamp(ts_it->get<std::string>())
                                : std::nullopt;
            if (!ts) {
                out.errors.push_back({i + 1, "bad-timestamp", "feed record lacks a valid 'ts'"});
                continue;
            }
            Observation obs;
            obs.spi = m.target_spi;
            obs.ts = *ts;
            obs.source = m.source;
            obs.value = 1.0;
            if (m.value_field) {
                const auto v = record.find(*m.value_field);
                if (v == record.end() || !v->is_number() || !std::isfinite(v->get<double>())) {
                    out.errors.push_back({i + 1, "bad-value", "field '" + *m.value_field + "' is not a finite number"});
                    continue;
                }
                obs.value = v->get<double>();
            }
            for (const auto& [k, v] : record.items()) {
                if (k != "ts" && (!m.value_field || k != *m.value_field) && !v.is_structured()) {
                    obs.meta[k] = detail::scalar_text(v);
                }
            }
            out.observations.push_back(std::move(obs));
        }
        if (!matched) {
            out.unmatched.push_back(i);
        }
    }
    return out;
}

IngestReceipt ingest(ObservationStore& store, std::span<const Observation> observations) {
    IngestReceipt receipt;
    for (const auto& obs : observations) {
        if (store.add(obs)) {
            ++receipt.accepted;
        } else {
            ++receipt.deduplicated;
        }
    }
    receipt.evaluation_trigger = receipt.accepted > 0;
    return receipt;
}

}  // namespace dscms
