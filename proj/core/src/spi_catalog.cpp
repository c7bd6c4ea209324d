#include "dscms/spi_catalog.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
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

constexpr std::array<std::pair<MetricUnit, std::string_view>, 9> kUnits{{
    {MetricUnit::count, "count"},
    {MetricUnit::currency, "currency"},
    {MetricUnit::percent, "percent"},
    {MetricUnit::days, "days"},
    {MetricUnit::months, "months"},
    {MetricUnit::multiple, "multiple"},
    {MetricUnit::bits, "bits"},
    {MetricUnit::probability, "probability"},
    {MetricUnit::qualitative, "qualitative"},
}};

constexpr std::array<std::pair<IndicatorKind, std::string_view>, 2> kIndicatorKinds{{
    {IndicatorKind::leading, "leading"},
    {IndicatorKind::lagging, "lagging"},
}};

constexpr std::array<std::pair<Aggregation, std::string_view>, 6> kAggregations{{
    {Aggregation::count_window, "count_window"},
    {Aggregation::sum_window, "sum_window"},
    {Aggregation::mean_window, "mean_window"},
    {Aggregation::latest, "latest"},
    {Aggregation::mom_percent_change, "mom_percent_change"},
    {Aggregation::mean_delta_days, "mean_delta_days"},
}};

constexpr std::array<std::pair<Comparator, std::string_view>, 4> kComparators{{
    {Comparator::gte, "gte"},
    {Comparator::gt, "gt"},
    {Comparator::lte, "lte"},
    {Comparator::lt, "lt"},
}};

constexpr std::string_view kTrendOnly = "trend_only";

struct WindowView {
    std::vector<const Observation*> current;
    std::vector<const Observation*> previous;
    bool any_eligible = false;
};

WindowView slice(std::span<const Observation> observations, Timestamp now, int window_days,
                 std::optional<Timestamp> baseline) {
    const Timestamp start = days_before(now, window_days);
    const Timestamp prev_start = days_before(now, 2L * window_days);
    WindowView view;
    for (const auto& obs : observations) {
        if (obs.ts >= now || (baseline && obs.ts < *baseline)) {
            continue;
        }
        view.any_eligible = true;
        if (obs.ts >= start) {
            view.current.push_back(&obs);
        } else if (obs.ts >= prev_start) {
            view.previous.push_back(&obs);
        }
    }
    return view;
}

double sum_of(const std::vector<const Observation*>& obs) {
    double total = 0.0;
    for (const auto* o : obs) {
        total += o->value;
    }
    return total;
}

std::optional<double> mom_from_sums(double previous, double current) {
    if (previous == 0.0) {
        return std::nullopt;
    }
    return 100.0 * (current - previous) / previous;
}

}  // namespace

std::string_view to_string(MetricUnit unit) { return name_of(kUnits, unit); }
std::string_view to_string(IndicatorKind kind) { return name_of(kIndicatorKinds, kind); }
std::string_view to_string(Aggregation aggregation) { return name_of(kAggregations, aggregation); }
std::string_view to_string(Comparator comparator) { return name_of(kComparators, comparator); }
std::optional<MetricUnit> parse_unit(std::string_view text) { return value_of(kUnits, text); }
std::optional<IndicatorKind> parse_indicator_kind(std::string_view text) { return value_of(kIndicatorKinds, text); }
std::optional<Aggregation> parse_aggregation(std::string_view text) { return value_of(kAggregations, text); }
std::optional<Comparator> parse_comparator(std::string_view text) { return value_of(kComparators, text); }

bool compare(Comparator comparator, double value, double threshold) {
    switch (comparator) {
        case Comparator::gte:
            return value >= threshold;
        case Comparator::gt:
            return value > threshold;
        case Comparator::lte:
            return value <= threshold;
        case Comparator::lt:
            return value < threshold;
    }
    return false;
}

// ---------------------------------------------------------------- documents

Json to_json(const SpiDef& spi) {
    Json j;
    j["id"] = spi.id;
    j["claim"] = spi.claim;
    j["title"] = spi.title;
    j["unit"] = to_string(spi.unit);
    j["kind"] = to_string(spi.kind);
    j["evidence_source"] = to_string(spi.evidence_source);
    j["aggregation"] = to_string(spi.aggregation);
    j["window_days"] = spi.window_days;
    j["comparator"] = to_string(spi.comparator);
    if (spi.threshold.is_trend_only()) {
        j["threshold"] = kTrendOnly;
    } else {
        j["threshold"] = *spi.threshold.value();
    }
    j["update_frequency_days"] = spi.update_frequency_days;
    if (spi.baseline) {
        j["baseline"] = format_timestamp(*spi.baseline);
    }
    if (spi.annotation) {
        const auto& a = *spi.annotation;
        Json ann;
        ann["example_text"] = a.example_text;
        ann["threshold_text"] = a.threshold_text;
        ann["example_value"] = a.example_value;
        ann["example_breached"] = a.example_breached;
        if (!a.note.empty()) {
            ann["note"] = a.note;
        }
        j["annotation"] = std::move(ann);
    }
    return j;
}

Result<SpiDef> parse_spi_def(const Json& record, const std::string& location) {
    detail::FieldReader r(record, location);
    SpiDef spi;
    const auto id = r.string("id");
    const auto claim = r.string("claim");
    const auto title = r.string("title", false);
    const auto unit = r.string("unit");
    const auto kind = r.string("kind");
    const auto source = r.string("evidence_source");
    const auto aggregation = r.string("aggregation");
    const auto window = r.integer("window_days");
    const auto comparator = r.string("comparator");
    const auto frequency = r.integer("update_frequency_days");
    const auto baseline = r.string("baseline", false);

    if (id) {
        spi.id = *id;
        if (id->empty()) {
            r.fail("empty-id", "indicator id must be non-empty");
        }
    }
    if (claim) {
        spi.claim = *claim;
    }
    spi.title = title.value_or("");
    if (unit) {
        if (const auto v = parse_unit(*unit)) {
            spi.unit = *v;
        } else {
            r.fail("unknown-unit", "unknown unit '" + *unit + "'");
        }
    }
    if (kind) {
        if (const auto v = parse_indicator_kind(*kind)) {
            spi.kind = *v;
        } else {
            r.fail("unknown-indicator-kind", "unknown indicator kind '" + *kind + "'");
        }
    }
    if (source) {
        if (const auto v = parse_evidence_source(*source)) {
            spi.evidence_source = *v;
        } else {
            r.fail("unknown-source", "unknown evidence source '" + *source + "'");
        }
    }
    if (aggregation) {
        if (const auto v = parse_aggregation(*aggregation)) {
            spi.aggregation = *v;
        } else {
            r.fail("unknown-aggregation", "unknown aggregation '" + *aggregation + "'");
        }
    }
    if (window) {
        if (*window < 1) {
            r.fail("bad-window", "window_days must be at least 1");
        }
        spi.window_days = static_cast<int>(*window);
    }
    if (comparator) {
        if (const auto v = parse_comparator(*comparator)) {
            spi.comparator = *v;
        } else {
            r.fail("unknown-comparator", "unknown comparator '" + *comparator + "'");
        }
    }
    if (frequency) {
        if (*frequency < 1) {
            r.fail("bad-frequency", "update_frequency_days must be at least 1");
        }
        spi.update_frequency_days = static_cast<int>(*frequency);
    }
    if (baseline) {
        if (const auto ts = parse_timestamp(*baseline)) {
            spi.baseline = *ts;
        } else {
            r.fail("bad-timestamp", "unparseable baseline '" + *baseline + "'");
        }
    }

    if (!record.is_object() || !record.contains("threshold")) {
        r.fail("missing-field", "missing field 'threshold'");
    } else {
        const Json& t = record.at("threshold");
        if (t.is_string() && t.get<std::string>() == kTrendOnly) {
            spi.threshold = Threshold::trend_only();
        } else if (t.is_number() && std::isfinite(t.get<double>())) {
            spi.threshold = Threshold::numeric(t.get<double>());
        } else {
            r.fail("bad-threshold", "threshold must be a number or 'trend_only'");
        }
    }

    if (record.is_object() && record.contains("annotation")) {
        detail::FieldReader a(record.at("annotation"), location + ".annotation");
        FixtureAnnotation ann;
        ann.example_text = a.string("example_text", false).value_or("");
        ann.threshold_text = a.string("threshold_text", false).value_or("");
        ann.example_value = a.number("example_value").value_or(0.0);
        const Json& ann_doc = record.at("annotation");
        if (ann_doc.is_object() && ann_doc.contains("example_breached") && ann_doc.at("example_breached").is_boolean()) {
            ann.example_breached = ann_doc.at("example_breached").get<bool>();
        } else {
            a.fail("missing-field", "annotation needs a boolean 'example_breached'");
        }
        ann.note = a.string("note", false).value_or("");
        for (auto& e : a.take_errors()) {
            r.fail(e.code, e.message);
        }
        spi.annotation = std::move(ann);
    }

    if (!r.errors().empty()) {
        return r.take_errors();
    }
    return spi;
}

Result<Unit> SpiCatalog::add(SpiDef spi) {
    if (defs_.contains(spi.id)) {
        return Error::make("duplicate-id", "duplicate indicator id '" + spi.id + "'", spi.id);
    }
    std::string id = spi.id;
    defs_.emplace(std::move(id), std::move(spi));
    return Unit{};
}

void SpiCatalog::replace(SpiDef spi) {
    std::string id = spi.id;
    defs_.insert_or_assign(std::move(id), std::move(spi));
}

const SpiDef* SpiCatalog::find(std::string_view id) const {
    const auto it = defs_.find(id);
    return it == defs_.end() ? nullptr : &it->second;
}

Result<SpiCatalog> load_catalog(std::span<const std::string> documents, Timestamp loaded_at) {
    SpiCatalog catalog{loaded_at};
    std::vector<Error> errors;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        auto parsed = detail::parse_document(documents[d], "catalog document " + std::to_string(d));
        if (!parsed) {
            for (const auto& e : parsed.errors()) {
                errors.push_back(e);
            }
            continue;
        }
        const Json& doc = parsed.value();
        if (!doc.is_array()) {
            errors.push_back(Error::make("bad-document", "a catalog document must be a list of indicators",
                                         "document " + std::to_string(d)));
            continue;
        }
        for (std::size_t i = 0; i < doc.size(); ++i) {
            auto spi = parse_spi_def(doc[i], "document " + std::to_string(d) + "[" + std::to_string(i) + "]");
            if (!spi) {
                for (const auto& e : spi.errors()) {
                    errors.push_back(e);
                }
                continue;
            }
            if (auto added = catalog.add(std::move(spi).value()); !added) {
                errors.push_back(added.error());
            }
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return catalog;
}

Json to_json(const SpiCatalog& catalog) {
    Json doc;
    doc["loaded_at"] = format_timestamp(catalog.loaded_at());
    Json spis = Json::array();
    for (const auto& [id, spi] : catalog.defs()) {
        spis.push_back(to_json(spi));
    }
    doc["spis"] = std::move(spis);
    return doc;
}

Result<SpiCatalog> catalog_from_json(const Json& doc) {
    detail::FieldReader r(doc, "catalog");
    const auto loaded = r.string("loaded_at");
    if (!r.errors().empty()) {
        return r.take_errors();
    }
    const auto ts = parse_timestamp(*loaded);
    if (!ts) {
        return Error::make("bad-timestamp", "unparseable loaded_at", "catalog");
    }
    if (!doc.contains("spis") || !doc.at("spis").is_array()) {
        return Error::make("missing-field", "catalog needs a 'spis' list", "catalog");
    }
    SpiCatalog catalog{*ts};
    std::vector<Error> errors;
    const Json& spis = doc.at("spis");
    for (std::size_t i = 0; i < spis.size(); ++i) {
        auto spi = parse_spi_def(spis[i], "spis[" + std::to_string(i) + "]");
        if (!spi) {
            errors.insert(errors.end(), spi.errors().begin(), spi.errors().end());
            continue;
        }
        if (auto added = catalog.add(std::move(spi).value()); !added) {
            errors.push_back(added.error());
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return catalog;
}

Json to_json(const SpiStatus& status) {
    Json j;
    j["spi"] = status.spi;
    j["value"] = status.value ? Json(*status.value) : Json(nullptr);
    j["breached"] = status.breached;
    j["stale"] = status.stale;
    j["evaluated_at"] = format_timestamp(status.evaluated_at);
    j["contributing_observation_count"] = status.contributing_observation_count;
    return j;
}

Result<SpiStatus> spi_status_from_json(const Json& doc) {
    detail::FieldReader r(doc, "status");
    SpiStatus s;
    s.spi = r.string("spi").value_or("");
    s.value = r.number("value", false);
    const auto at = r.string("evaluated_at");
    s.contributing_observation_count = static_cast<int>(r.integer("contributing_observation_count").value_or(0));
    if (doc.is_object()) {
        s.breached = doc.value("breached", false);
        s.stale = doc.value("stale", false);
    }
    if (at) {
        if (const auto ts = parse_timestamp(*at)) {
            s.evaluated_at = *ts;
        } else {
            r.fail("bad-timestamp", "unparseable evaluated_at");
        }
    }
    if (!r.errors().empty()) {
        return r.take_errors();
    }
    return s;
}

Json to_json(const SpiEvent& event) {
    Json j;
    j["kind"] = event.kind == SpiEventKind::breach ? "breach" : "trend";
    j["spi"] = event.spi;
    j["claim"] = event.claim;
    j["value"] = event.value ? Json(*event.value) : Json(nullptr);
    j["threshold"] = event.threshold ? Json(*event.threshold) : Json(nullptr);
    j["at"] = format_timestamp(event.at);
    return j;
}

// ---------------------------------------------------------------- evaluation

std::optional<double> mom_percent_change(std::span<const Observation> observations, Timestamp now,
                                         int window_days) {
    const WindowView view = slice(observations, now, window_days, std::nullopt);
    return mom_from_sums(sum_of(view.previous), sum_of(view.current));
}

SpiStatus evaluate(const SpiDef& spi, std::span<const Observation> observations, Timestamp now,
                   Timestamp loaded_at) {
    SpiStatus status;
    status.spi = spi.id;
    status.evaluated_at = now;

    const WindowView view = slice(observations, now, spi.window_days, spi.baseline);
    std::vector<const Observation*> contributing = view.current;

    switch (spi.aggregation) {
        case Aggregation::count_window:
            if (view.any_eligible) {
                status.value = static_cast<double>(view.current.size());
            }
            break;
        case Aggregation::sum_window:
            if (view.any_eligible) {
                status.value = sum_of(view.current);
            }
            break;
        case Aggregation::mean_window:
        case Aggregation::mean_delta_days:
            if (!view.current.empty()) {
                status.value = sum_of(view.current) / static_cast<double>(view.current.size());
            }
            break;
        case Aggregation::latest:
            if (!view.current.empty()) {
                status.value = view.current.back()->value;
            }
            break;
        case Aggregation::mom_percent_change:
            contributing.insert(contributing.end(), view.previous.begin(), view.previous.end());
            if (view.any_eligible) {
                status.value = mom_from_sums(sum_of(view.previous), sum_of(view.current));
            }
            break;
    }
    status.contributing_observation_count = static_cast<int>(contributing.size());

    if (status.value && !spi.threshold.is_trend_only()) {
        status.breached = compare(spi.comparator, *status.value, *spi.threshold.value());
    }

    Timestamp reference = loaded_at;
    if (spi.baseline && *spi.baseline > reference) {
        reference = *spi.baseline;
    }
    if (!contributing.empty()) {
        reference = (*std::max_element(contributing.begin(), contributing.end(),
                                       [](const Observation* a, const Observation* b) { return a->ts < b->ts; }))
                        ->ts;
    }
    status.stale = now - reference > std::chrono::days{spi.update_frequency_days};
    return status;
}

Evaluation evaluate_all(const SpiCatalog& catalog, const ObservationStore& store, Timestamp now,
                        std::span<const SpiStatus> previous) {
    std::map<std::string_view, const SpiStatus*> before;
    for (const auto& s : previous) {
        before.emplace(s.spi, &s);
    }
    Evaluation out;
    out.statuses.reserve(catalog.size());
    for (const auto& [id, spi] : catalog.defs()) {
        const auto series = store.for_spi(id);
        SpiStatus status = evaluate(spi, series, now, catalog.loaded_at());
        const auto prior = before.find(id);
        const SpiStatus* prev = prior == before.end() ? nullptr : prior->second;
        if (status.breached && (prev == nullptr || !prev->breached)) {
            out.breach_events.push_back(
                {SpiEventKind::breach, id, spi.claim, status.value, spi.threshold.value(), now});
        }
        if (spi.threshold.is_trend_only() && status.value && (prev == nullptr || prev->value != status.value)) {
            out.trend_events.push_back({SpiEventKind::trend, id, spi.claim, status.value, std::nullopt, now});
        }
        out.statuses.push_back(std::move(status));
    }
    return out;
}

Result<Priority> prioritize(const PrioritizationScore& score) {
    const std::array<std::pair<std::string_view, int>, 6> dims{{
        {"relevance", score.relevance},
        {"claim_importance", score.claim_importance},
        {"proactive", score.proactive},
        {"measurability", score.measurability},
        {"timeliness", score.timeliness},
        {"implementation_feasibility", score.implementation_feasibility},
    }};
    std::vector<Error> errors;
    for (const auto& [name, value] : dims) {
        if (value < 0 || value > 5) {
            errors.push_back(Error::make("out-of-range", std::string(name) + " must be within 0..5", std::string(name)));
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return Priority{(score.relevance + score.claim_importance + score.proactive) / 3.0,
                    (score.measurability + score.timeliness + score.implementation_feasibility) / 3.0};
}

GapReport leading_lagging_gap(const SpiDef& leading_def, const SpiStatus& leading, const SpiDef& lagging_def,
                              const SpiStatus& lagging) {
    GapReport report;
    report.comparable = leading_def.unit == lagging_def.unit;
    if (report.comparable && leading.value && lagging.value) {
        report.gap = *lagging.value - *leading.value;
    }
    return report;
}

}  // namespace dscms
