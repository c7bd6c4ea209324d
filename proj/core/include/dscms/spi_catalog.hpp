#pragma once

#include "dscms/json.hpp"
#include "dscms/observation.hpp"
#include "dscms/result.hpp"
#include "dscms/time.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dscms {

enum class MetricUnit { count, currency, percent, days, months, multiple, bits, probability, qualitative };
enum class IndicatorKind { leading, lagging };
enum class Aggregation { count_window, sum_window, mean_window, latest, mom_percent_change, mean_delta_days };
enum class Comparator { gte, gt, lte, lt };

[[nodiscard]] std::string_view to_string(MetricUnit unit);
[[nodiscard]] std::string_view to_string(IndicatorKind kind);
[[nodiscard]] std::string_view to_string(Aggregation aggregation);
[[nodiscard]] std::string_view to_string(Comparator comparator);
[[nodiscard]] std::optional<MetricUnit> parse_unit(std::string_view text);
[[nodiscard]] std::optional<IndicatorKind> parse_indicator_kind(std::string_view text);
[[nodiscard]] std::optional<Aggregation> parse_aggregation(std::string_view text);
[[nodiscard]] std::optional<Comparator> parse_comparator(std::string_view text);

[[nodiscard]] bool compare(Comparator comparator, double value, double threshold);

/// Numeric threshold, or none for indicators that are only tracked.
class Threshold {
public:
    [[nodiscard]] static Threshold numeric(double value) { return Threshold{value}; }
    [[nodiscard]] static Threshold trend_only() { return Threshold{}; }

    [[nodiscard]] bool is_trend_only() const noexcept { return !value_.has_value(); }
    [[nodiscard]] std::optional<double> value() const noexcept { return value_; }

    friend bool operator==(const Threshold&, const Threshold&) = default;

private:
    Threshold() = default;
    explicit Threshold(double v) : value_(v) {}
    std::optional<double> value_;
};

/// Authoring notes kept with a bundled catalog row: the published example
/// value, its encoding, and whether it is expected to breach.
struct FixtureAnnotation {
    std::string example_text;
    std::string threshold_text;
    double example_value = 0.0;
    bool example_breached = false;
    std::string note;

    friend bool operator==(const FixtureAnnotation&, const FixtureAnnotation&) = default;
};

struct SpiDef {
    std::string id;
    std::string claim;
    std::string title;
    MetricUnit unit = MetricUnit::count;
    IndicatorKind kind = IndicatorKind::lagging;
    EvidenceSource evidence_source = EvidenceSource::incidents;
    Aggregation aggregation = Aggregation::count_window;
    int window_days = 30;
    Comparator comparator = Comparator::gte;
    Threshold threshold = Threshold::trend_only();
    int update_frequency_days = 30;
    std::optional<FixtureAnnotation> annotation;
    /// Observations before this instant are ignored (set when a claim is reinstated).
    std::optional<Timestamp> baseline;

    friend bool operator==(const SpiDef&, const SpiDef&) = default;
};

[[nodiscard]] Json to_json(const SpiDef& spi);
[[nodiscard]] Result<SpiDef> parse_spi_def(const Json& record, const std::string& location);

class SpiCatalog {
public:
    SpiCatalog() = default;
    explicit SpiCatalog(Timestamp loaded_at) : loaded_at_(loaded_at) {}

    /// Fails on a duplicate id.
    [[nodiscard]] Result<Unit> add(SpiDef spi);
    void replace(SpiDef spi);

    [[nodiscard]] const SpiDef* find(std::string_view id) const;
    [[nodiscard]] const std::map<std::string, SpiDef, std::less<>>& defs() const noexcept { return defs_; }
    [[nodiscard]] std::size_t size() const noexcept { return defs_.size(); }
    [[nodiscard]] Timestamp loaded_at() const noexcept { return loaded_at_; }
    void set_loaded_at(Timestamp ts) { loaded_at_ = ts; }

    friend bool operator==(const SpiCatalog&, const SpiCatalog&) = default;

private:
    std::map<std::string, SpiDef, std::less<>> defs_;
    Timestamp loaded_at_{};
};

/// Loads one or more catalog documents (each a list of indicator records).
[[nodiscard]] Result<SpiCatalog> load_catalog(std::span<const std::string> documents, Timestamp loaded_at);
[[nodiscard]] Json to_json(const SpiCatalog& catalog);
[[nodiscard]] Result<SpiCatalog> catalog_from_json(const Json& doc);

struct SpiStatus {
    std::string spi;
    std::optional<double> value;
    bool breached = false;
    bool stale = false;
    Timestamp evaluated_at{};
    int contributing_observation_count = 0;

    friend bool operator==(const SpiStatus&, const SpiStatus&) = default;
};

[[nodiscard]] Json to_json(const SpiStatus& status);
[[nodiscard]] Result<SpiStatus> spi_status_from_json(const Json& doc);

/// Evaluates one indicator over its observations, which must be sorted
/// ascending by time. `loaded_at` is the staleness reference used when no
/// observation contributes.
[[nodiscard]] SpiStatus evaluate(const SpiDef& spi, std::span<const Observation> observations, Timestamp now,
                                 Timestamp loaded_at);

/// Percent change of the window sum [now-w, now) over [now-2w, now-w).
[[nodiscard]] std::optional<double> mom_percent_change(std::span<const Observation> observations, Timestamp now,
                                                       int window_days);

enum class SpiEventKind { breach, trend };

struct SpiEvent {
    SpiEventKind kind = SpiEventKind::breach;
    std::string spi;
    std::string claim;
    std::optional<double> value;
    std::optional<double> threshold;
    Timestamp at{};

    friend bool operator==(const SpiEvent&, const SpiEvent&) = default;
};

[[nodiscard]] Json to_json(const SpiEvent& event);

struct Evaluation {
    std::vector<SpiStatus> statuses;
    /// Indicators that entered breach relative to the previous evaluation.
    std::vector<SpiEvent> breach_events;
    /// Value changes on indicators with no numeric threshold.
    std::vector<SpiEvent> trend_events;
};

/// Evaluates every indicator. Breach events are edge-triggered against
/// `previous`; an indicator missing there counts as not breached.
[[nodiscard]] Evaluation evaluate_all(const SpiCatalog& catalog, const ObservationStore& store, Timestamp now,
                                      std::span<const SpiStatus> previous = {});

struct PrioritizationScore {
    int relevance = 0;
    int claim_importance = 0;
    int proactive = 0;
    int measurability = 0;
    int timeliness = 0;
    int implementation_feasibility = 0;
};

struct Priority {
    double significance = 0.0;
    double feasibility = 0.0;
};

[[nodiscard]] Result<Priority> prioritize(const PrioritizationScore& score);

struct GapReport {
    std::optional<double> gap;
    bool comparable = false;
};

/// Difference lagging minus leading, when both values exist and share a unit.
[[nodiscard]] GapReport leading_lagging_gap(const SpiDef& leading_def, const SpiStatus& leading,
                                            const SpiDef& lagging_def, const SpiStatus& lagging);

}  // namespace dscms
