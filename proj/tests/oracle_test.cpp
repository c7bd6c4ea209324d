#include "test_support.hpp"

#include "dscms/oracle.hpp"

#include <gmock/gmock.h>

#include <chrono>

namespace dscms {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;
using namespace dscms::testing;

TEST(Oracle, FixpointOnHandBuiltChain) {
    const auto c = SafetyCase::from_parts(
        "chain", 1, {{"a", NodeKind::claim, "", {"top"}}, {"b", NodeKind::claim}, {"c", NodeKind::claim}},
        {{"b", "a", RelKind::supports, PropagationPolicy::flag},
         {"c", "b", RelKind::supports, PropagationPolicy::invalidate}},
        {});
    const auto f = oracle::exhaustive_fixpoint(c, {"c"}, {});
    EXPECT_THAT(f.invalidated, ElementsAre("b", "c"));
    EXPECT_THAT(f.under_review, ElementsAre("a"));
}

TEST(Oracle, BundledScenariosAgree) {
    for (const auto& name : fixtures::scenario_names()) {
        SCOPED_TRACE(name);
        const auto run = run_scenario(name);
        const auto cmp = oracle::oracle_compare(run.safety_case, bundled_catalog(day(0)), run.result.report.scenario,
                                                run.result.evaluation.statuses);
        ASSERT_TRUE(cmp.ok());
        EXPECT_TRUE(cmp.value().agrees());
    }
}

TEST(OracleProperty, EngineMatchesFixpointOnRandomCases) {
    std::mt19937 rng(424242);
    const auto started = std::chrono::steady_clock::now();
    int compared = 0;
    for (int round = 0; round < 200; ++round) {
        const auto rc = random_case(rng, 50);
        const auto cmp = oracle::oracle_compare(rc.safety_case, rc.catalog, rc.scenario, rc.statuses);
        ASSERT_TRUE(cmp.ok());
        EXPECT_THAT(cmp.value().false_negatives, IsEmpty()) << "round " << round;
        EXPECT_THAT(cmp.value().false_positives, IsEmpty()) << "round " << round;
        EXPECT_THAT(cmp.value().status_mismatches, IsEmpty()) << "round " << round;
        ++compared;
    }
    EXPECT_EQ(compared, 200);
    EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::seconds{10});
}

TEST(OracleProperty, ComparisonCatchesEngineThatIgnoresFlagEdges) {
    std::mt19937 rng(5);
    int caught = 0;
    for (int round = 0; round < 200; ++round) {
        const auto rc = random_case(rng, 50);
        const auto cmp = oracle::oracle_compare(rc.safety_case, rc.catalog, rc.scenario, rc.statuses,
                                                {.skip_flag_edges = true});
        ASSERT_TRUE(cmp.ok());
        caught += cmp.value().agrees() ? 0 : 1;
    }
    EXPECT_GT(caught, 0);
}

}  // namespace
}  // namespace dscms
