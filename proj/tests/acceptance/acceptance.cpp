// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "random_case.hpp"

#include "dscms/audit.hpp"
#include "dscms/engine.hpp"
#include "dscms/fixtures.hpp"
#include "dscms/governance.hpp"
#include "dscms/oracle.hpp"
#include "dscms/traceability.hpp"
#include "dscms/workspace.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace dscms;
using Clock = std::chrono::steady_clock;

constexpr double kArithmeticTolerance = 1e-9;

struct Verdict {
    bool passed = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            if (passed) {
                detail = what;
            }
            passed = false;
        }
    }
};

Timestamp at(std::string_view text) { return parse_timestamp(text).value_or(Timestamp{}); }

Timestamp day(int n) { return at("2025-01-01T00:00:00Z") + std::chrono::days{n}; }

std::string join(const std::set<std::string>& items) {
    std::string out = "{";
    for (const auto& i : items) {
        out += (out.size() > 1 ? "," : "") + i;
    }
    return out + "}";
}

std::set<std::string> breached(const std::vector<SpiStatus>& statuses) {
    std::set<std::string> out;
    for (const auto& s : statuses) {
        if (s.breached) {
            out.insert(s.spi);
        }
    }
    return out;
}

std::set<std::string> invalid_claims(const SafetyCase& c) {
    std::set<std::string> out;
    for (const auto& [id, n] : c.nodes()) {
        if (n.kind == NodeKind::claim && n.status == NodeStatus::invalidated) {
            out.insert(id);
        }
    }
    return out;
}

/// State after simulating `name` on a fresh engine whose catalog was loaded at
/// the scenario trigger, the same way the command-line tool runs it.
struct Simulated {
    std::shared_ptr<const WorkspaceState> state;
    Classification classification;
    std::optional<Alert> alert;
    double seconds = 0.0;
};

std::optional<Simulated> simulate(const std::string& name) {
    auto scenario = fixtures::scenario(name);
    if (!scenario) {
        return std::nullopt;
    }
    const auto started = Clock::now();
    auto state = bundled_state(scenario.value().trigger);
    if (!state) {
        return std::nullopt;
    }
    auto engine = Engine::in_memory(std::move(state).value());
    auto outcome = engine->simulate(name, "acceptance");
    if (!outcome || !outcome.value().check) {
        return std::nullopt;
    }
    Simulated out;
    out.state = engine->snapshot();
    out.classification = outcome.value().check->classification;
    out.alert = outcome.value().check->alert;
    out.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return out;
}

struct ScenarioExpectation {
    std::string name;
    std::set<std::string> spis;
    std::set<std::string> claims;
};

const std::vector<ScenarioExpectation>& scenario_expectations() {
    static const std::vector<ScenarioExpectation> kExpected{
        {"scenario-1",
         {"C3.1-SPI-2", "C3.1-SPI-5", "C2.1-SPI-2", "C2.1-SPI-5", "C1.1-SPI-2", "C1.1-SPI-5"},
         {"C3.1", "C2.1", "C1.1", "C0"}},
        {"scenario-2", {"C2.2-SPI-1", "C2.2-SPI-2", "C2.2-SPI-4", "C2.2-SPI-5"}, {"C2.2"}},
        {"scenario-3", {"C6.3-SPI-3"}, {"C6.3"}},
        {"scenario-4", {"C5.1-SPI-4"}, {"C5.1"}},
    };
    return kExpected;
}

Verdict scenario_reproduction() {
    Verdict v;
    std::string timings;
    for (const auto& e : scenario_expectations()) {
        const auto run = simulate(e.name);
        if (!run) {
            v.require(false, e.name + " did not run");
            continue;
        }
        const auto spis = breached(run->state->statuses);
        const auto claims = invalid_claims(run->state->safety_case);
        v.require(spis == e.spis, e.name + " breached " + join(spis) + " expected " + join(e.spis));
        v.require(claims == e.claims, e.name + " invalidated " + join(claims) + " expected " + join(e.claims));
        v.require(run->seconds < 1.0, e.name + " took " + std::to_string(run->seconds) + " s");
        if (e.name == "scenario-2") {
            v.require(run->state->safety_case.status_of("C0") == NodeStatus::valid, "scenario-2 left C0 not valid");
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.3fs", timings.empty() ? "" : " ", run->seconds);
        timings += buf;
    }
    if (v.passed) {
        v.detail = "4 scenarios exact; runtimes " + timings;
    }
    return v;
}

Verdict insight_category_matrix() {
    Verdict v;
    using IC = InsightCategory;
    // Rows: capability increase, systemic impact, internal process.
    const std::map<std::string, std::set<IC>> matrix{
        {"scenario-1", {IC::capability_increase, IC::systemic_impact}},
        {"scenario-2", {IC::systemic_impact}},
        {"scenario-3", {IC::capability_increase, IC::systemic_impact}},
        {"scenario-4", {IC::internal_process}},
    };
    int cells = 0;
    for (const auto& [name, yes] : matrix) {
        const auto run = simulate(name);
        if (!run) {
            v.require(false, name + " did not run");
            continue;
        }
        const auto& got = run->classification.categories;
        for (const auto c : {IC::capability_increase, IC::systemic_impact, IC::internal_process}) {
            v.require(got.contains(c) == yes.contains(c),
                      name + " " + std::string(to_string(c)) + " cell is " + (got.contains(c) ? "YES" : "NO"));
            ++cells;
        }
    }
    v.require(severity_of(IC::capability_increase) == Severity::highest, "capability increase is not highest");
    v.require(severity_of(IC::systemic_impact) == Severity::high_medium, "systemic impact is not high_medium");
    v.require(severity_of(IC::internal_process) == Severity::medium_low, "internal process is not medium_low");
    if (v.passed) {
        v.detail = std::to_string(cells) + " cells and 3 severity labels match";
    }
    return v;
}

bool has_action(const Alert& a, RequiredAction action) {
    return std::find(a.required_actions.begin(), a.required_actions.end(), action) != a.required_actions.end();
}

Verdict routing() {
    Verdict v;
    v.require(!route(Severity::none, {}).has_value(), "severity none produced an alert");
    const std::map<Severity, std::set<Role>> recipients{
        {Severity::medium_low, {Role::safety_team}},
        {Severity::high_medium, {Role::responsible_scaling_officer, Role::executive_leadership, Role::safety_team}},
        {Severity::highest,
         {Role::responsible_scaling_officer, Role::executive_leadership, Role::safety_team, Role::external_oversight}},
    };
    for (const auto& [severity, roles] : recipients) {
        const auto alert = route(severity, {});
        const std::string label(to_string(severity));
        if (!alert) {
            v.require(false, label + " produced no alert");
            continue;
        }
        v.require(alert->severity == severity, label + " alert carries another severity");
        v.require(alert->recipients == roles, label + " recipients differ");
        v.require(has_action(*alert, RequiredAction::pause_training_or_deployment) == (severity == Severity::highest),
                  label + " pause action placement");
        v.require(has_action(*alert, RequiredAction::notify_rso_ceo) == (severity >= Severity::high_medium),
                  label + " RSO/CEO notification placement");
    }
    v.require(has_action(*route(Severity::medium_low, {}), RequiredAction::update_evaluations),
              "medium_low lacks update_evaluations");
    v.require(has_action(*route(Severity::highest, {}), RequiredAction::rsp_reevaluation),
              "highest lacks rsp_reevaluation");
    if (v.passed) {
        v.detail = "3 severities map to recipients and actions";
    }
    return v;
}

Verdict oracle_equivalence() {
    Verdict v;
    std::mt19937 rng(20250101);
    const auto started = Clock::now();
    int cases = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t mismatched = 0;
    for (; cases < 200; ++cases) {
        const auto rc = testing::random_case(rng, 50);
        const auto cmp = oracle::oracle_compare(rc.safety_case, rc.catalog, rc.scenario, rc.statuses);
        if (!cmp) {
            v.require(false, "case " + std::to_string(cases) + ": " + cmp.error().message);
            break;
        }
        fp += cmp.value().false_positives.size();
        fn += cmp.value().false_negatives.size();
        mismatched += cmp.value().status_mismatches.size();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
    v.require(fp == 0 && fn == 0 && mismatched == 0,
              std::to_string(fp) + " false positives, " + std::to_string(fn) + " false negatives, " +
                  std::to_string(mismatched) + " status mismatches");
    v.require(seconds < 10.0, "took " + std::to_string(seconds) + " s");
    if (v.passed) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d cases, 0 FP, 0 FN, %.3fs", cases, seconds);
        v.detail = buf;
    }
    return v;
}

Observation point(std::string spi, Timestamp ts, double value) {
    Observation o;
    o.spi = std::move(spi);
    o.ts = ts;
    o.value = value;
    return o;
}

SpiDef def(std::string id, Aggregation agg, Comparator cmp, Threshold threshold) {
    SpiDef d;
    d.id = std::move(id);
    d.claim = "C";
    d.title = d.id;
    d.aggregation = agg;
    d.comparator = cmp;
    d.threshold = threshold;
    d.window_days = 30;
    d.update_frequency_days = 30;
    return d;
}

Verdict aggregation_arithmetic() {
    Verdict v;
    // Previous window sums to 10, current to 8.
    const std::vector<Observation> down{point("X", day(5), 4), point("X", day(20), 6), point("X", day(40), 8)};
    const auto minus = mom_percent_change(down, day(60), 30);
    v.require(minus && std::abs(*minus - (-20.0)) <= kArithmeticTolerance, "decrease is not -20%");

    // Previous window sums to 100000, current to 130000.
    const std::vector<Observation> up{point("L", day(10), 100000), point("L", day(35), 50000),
                                      point("L", day(50), 80000)};
    const auto plus = evaluate(def("L", Aggregation::mom_percent_change, Comparator::gte, Threshold::numeric(10)), up,
                               day(60), day(0));
    v.require(plus.value && std::abs(*plus.value - 30.0) <= kArithmeticTolerance, "increase is not +30%");
    v.require(plus.breached, "+30% against 10% did not breach");

    const auto mttd = evaluate(def("T", Aggregation::mean_delta_days, Comparator::gt, Threshold::numeric(7)),
                               std::vector<Observation>{point("T", day(10), 10)}, day(20), day(0));
    v.require(mttd.value && std::abs(*mttd.value - 10.0) <= kArithmeticTolerance, "MTTD value is not 10");
    v.require(mttd.breached, "MTTD 10 vs 7 did not breach");

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> magnitude(-1e6, 1e6);
    int trend_checks = 0;
    for (const auto agg : {Aggregation::count_window, Aggregation::sum_window, Aggregation::mean_window,
                           Aggregation::latest, Aggregation::mom_percent_change, Aggregation::mean_delta_days}) {
        for (const auto cmp : {Comparator::gte, Comparator::gt, Comparator::lte, Comparator::lt}) {
            for (int round = 0; round < 25; ++round) {
                std::vector<Observation> series;
                for (int i = 0; i < 10; ++i) {
                    series.push_back(point("R", day(3 * i + 1), magnitude(rng)));
                }
                const auto s = evaluate(def("R", agg, cmp, Threshold::trend_only()), series, day(60), day(0));
                v.require(!s.breached, "a trend-only indicator breached");
                ++trend_checks;
            }
        }
    }
    if (v.passed) {
        v.detail = "-20%, +30%, MTTD 10>7 within 1e-9; " + std::to_string(trend_checks) + " trend-only evaluations";
    }
    return v;
}

Verdict catalog_load() {
    Verdict v;
    const auto catalog = fixtures::cyber_catalog(day(0));
    const auto safety_case = fixtures::cyber_case();
    if (!catalog || !safety_case) {
        v.require(false, "bundled case or catalog failed to load");
        return v;
    }
    v.require(catalog.value().size() == 161, "catalog has " + std::to_string(catalog.value().size()) + " rows");
    const auto violations = validate_traceability(safety_case.value(), catalog.value());
    std::size_t dangling = 0;
    for (const auto& x : violations) {
        dangling += x.code == "dangling-spi-claim" ? 1 : 0;
    }
    v.require(dangling == 0, std::to_string(dangling) + " dangling claim references");
    std::size_t mismatches = 0;
    std::size_t breaches = 0;
    for (const auto& [id, spi] : catalog.value().defs()) {
        if (!spi.annotation) {
            v.require(false, id + " has no annotation");
            continue;
        }
        const auto& note = *spi.annotation;
        const bool got =
            !spi.threshold.is_trend_only() && compare(spi.comparator, note.example_value, *spi.threshold.value());
        if (got != note.example_breached) {
            ++mismatches;
            v.require(false, id + " example disagrees with its annotation");
        }
        breaches += got ? 1 : 0;
    }
    if (v.passed) {
        v.detail = "161 rows, 0 dangling claims, " + std::to_string(breaches) + " documented breaches reproduced";
    }
    return v;
}

Verdict prioritization() {
    Verdict v;
    const auto near = [](double a, double b) { return std::abs(a - b) < 0.005; };
    const auto extremes = prioritize({5, 5, 5, 0, 0, 0});
    v.require(extremes && near(extremes.value().significance, 5.0) && near(extremes.value().feasibility, 0.0),
              "extreme case is not (5.0, 0.0)");
    const auto mixed = prioritize({5, 3, 0, 5, 3, 0});
    v.require(mixed && near(mixed.value().significance, 2.67) && near(mixed.value().feasibility, 2.67),
              "mixed case is not (2.67, 2.67)");
    const auto symmetric = prioritize({3, 3, 3, 3, 3, 3});
    v.require(symmetric && near(symmetric.value().significance, 3.0) && near(symmetric.value().feasibility, 3.0),
              "symmetric case is not (3.0, 3.0)");
    std::size_t checked = 0;
    for (int a = 0; a <= 5; ++a) {
        for (int b = 0; b <= 5; ++b) {
            for (int c = 0; c <= 5; ++c) {
                for (int d = 0; d <= 5; ++d) {
                    for (int e = 0; e <= 5; ++e) {
                        for (int f = 0; f <= 5; ++f) {
                            const auto p = prioritize({a, b, c, d, e, f});
                            const bool bounded = p && p.value().significance >= 0 && p.value().significance <= 5 &&
                                                 p.value().feasibility >= 0 && p.value().feasibility <= 5;
                            v.require(bounded, "output outside [0,5]");
                            ++checked;
                        }
                    }
                }
            }
        }
    }
    v.require(!prioritize({6, 0, 0, 0, 0, 0}).ok(), "score 6 accepted");
    if (v.passed) {
        v.detail = "(5.0,0.0) (2.67,2.67) (3.0,3.0); " + std::to_string(checked) + " inputs bounded in [0,5]";
    }
    return v;
}

class ScratchDir {
public:
    ScratchDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("dscms-acceptance-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism_and_persistence() {
    Verdict v;
    const auto first = simulate("scenario-1");
    const auto second = simulate("scenario-1");
    if (!first || !second || !first->state->last_report || !second->state->last_report) {
        v.require(false, "scenario-1 did not run");
        return v;
    }
    v.require(serialize_report(*first->state->last_report) == serialize_report(*second->state->last_report),
              "impact reports differ between identical runs");
    v.require(render_governance_report(report_inputs(*first->state)) ==
                  render_governance_report(report_inputs(*second->state)),
              "governance reports differ between identical runs");

    ScratchDir dir;
    const Workspace ws(dir.path());
    auto state = *first->state;
    const auto gen1 = ws.persist(state);
    const auto loaded = ws.load();
    v.require(gen1 && loaded && loaded.value().state == state, "persist/load did not round-trip");

    state.open_recoveries.push_back({"extra", "newer generation"});
    const auto gen2 = ws.persist(state);
    if (gen1 && gen2) {
        const auto newest = ws.snapshot_path(gen2.value());
        const auto text = slurp(newest);
        std::ofstream(newest, std::ios::binary | std::ios::trunc) << text.substr(0, text.size() / 3);
        const auto fallback = ws.load();
        v.require(fallback && fallback.value().generation == gen1.value() && fallback.value().skipped.size() == 1 &&
                      fallback.value().state == *first->state,
                  "truncated snapshot did not fall back to the previous generation");
    } else {
        v.require(false, "persist failed");
    }

    AuditLog log;
    log.append("2025-01-01T00:00:00Z", "a", kAuditIngest, Json{{"accepted", 1}});
    log.append("2025-01-02T00:00:00Z", "b", kAuditAlert, Json{{"severity", "highest"}});
    log.append("2025-01-03T00:00:00Z", "c", kAuditGate, Json{{"gate", "G1"}});
    const auto text = log.text();
    v.require(verify_chain(text).ok, "untampered log does not verify");
    std::size_t undetected = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        for (const unsigned char mask : {0x01, 0x20, 0x80}) {
            auto tampered = text;
            tampered[i] = static_cast<char>(static_cast<unsigned char>(tampered[i]) ^ mask);
            undetected += verify_chain(tampered).ok ? 1 : 0;
        }
    }
    v.require(undetected == 0, std::to_string(undetected) + " single-byte tampers went undetected");
    if (v.passed) {
        v.detail = "reports byte-identical; round trip, fallback and " + std::to_string(text.size() * 3) +
                   " tampers detected";
    }
    return v;
}

Verdict requirements_traceability() {
    Verdict v;
    const auto run = simulate("scenario-1");
    if (!run) {
        v.require(false, "scenario-1 did not run");
        return v;
    }
    const auto report = governance_report(report_inputs(*run->state));
    std::set<std::string> listed;
    for (const auto& row : report.at("requirements_traceability")) {
        if (!row.at("feature").get<std::string>().empty() && !row.at("verified_by").get<std::string>().empty()) {
            listed.insert(row.at("requirement").get<std::string>());
        }
    }
    for (const auto* id :
         {"REQ-001", "REQ-002", "REQ-005", "REQ-017", "REQ-018", "REQ-019", "REQ-020", "REQ-023", "REQ-025"}) {
        v.require(listed.contains(id), std::string(id) + " missing from the report");
    }
    if (v.passed) {
        v.detail = "9 requirements listed with feature and test";
    }
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"scenario-reproduction", scenario_reproduction},
        {"insight-category-matrix", insight_category_matrix},
        {"severity-routing", routing},
        {"oracle-equivalence", oracle_equivalence},
        {"aggregation-arithmetic", aggregation_arithmetic},
        {"catalog-load", catalog_load},
        {"prioritization", prioritization},
        {"determinism-and-persistence", determinism_and_persistence},
        {"requirements-traceability", requirements_traceability},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict verdict;
        try {
            verdict = check();
        } catch (const std::exception& e) {
            verdict = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", verdict.passed ? "PASS" : "FAIL", name.c_str(), verdict.detail.c_str());
        failures += verdict.passed ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
