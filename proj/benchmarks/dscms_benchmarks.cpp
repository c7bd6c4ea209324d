#include "random_case.hpp"

#include "dscms/consistency.hpp"
#include "dscms/fixtures.hpp"
#include "dscms/governance.hpp"
#include "dscms/ingestion.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace dscms;

void BM_PropagateRandomCase(benchmark::State& state) {
    std::mt19937 rng(static_cast<unsigned>(state.range(0)));
    const auto rc = testing::random_case(rng, static_cast<int>(state.range(0)));
    const auto direct = direct_impact(rc.safety_case, rc.catalog, rc.scenario);
    if (!direct) {
        state.SkipWithError("direct impact failed");
        return;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(propagate(rc.safety_case, direct.value(), rc.statuses));
    }
    state.counters["nodes"] = static_cast<double>(rc.safety_case.nodes().size());
}
BENCHMARK(BM_PropagateRandomCase)->Arg(50)->Arg(500)->Arg(5000);

struct BundledInputs {
    SafetyCase safety_case;
    SpiCatalog catalog;
    ObservationStore store;
    Timestamp trigger{};
};

BundledInputs scenario_inputs(std::string_view name) {
    auto scenario = fixtures::scenario(name).value();
    BundledInputs in{fixtures::cyber_case().value(), fixtures::cyber_catalog(scenario.trigger).value(), {},
                     scenario.trigger};
    ingest(in.store, scenario.observations);
    return in;
}

void BM_EvaluateAllBundledCatalog(benchmark::State& state) {
    const auto in = scenario_inputs("scenario-1");
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_all(in.catalog, in.store, in.trigger));
    }
    state.counters["indicators"] = static_cast<double>(in.catalog.size());
}
BENCHMARK(BM_EvaluateAllBundledCatalog);

void BM_CheckAndClassifyScenario(benchmark::State& state) {
    const auto in = scenario_inputs("scenario-1");
    for (auto _ : state) {
        auto checked = check(in.safety_case, in.catalog, in.store, in.trigger);
        benchmark::DoNotOptimize(classify(checked.value().report, in.safety_case));
    }
}
BENCHMARK(BM_CheckAndClassifyScenario);

void BM_IngestObservations(benchmark::State& state) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> value(0, 100);
    std::vector<Observation> batch;
    for (int i = 0; i < state.range(0); ++i) {
        Observation o;
        o.spi = "C2.1-SPI-" + std::to_string(1 + i % 13);
        o.ts = testing::kRandomCaseLoadedAt + std::chrono::minutes{i};
        o.value = value(rng);
        batch.push_back(std::move(o));
    }
    for (auto _ : state) {
        ObservationStore store;
        benchmark::DoNotOptimize(ingest(store, batch));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IngestObservations)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
