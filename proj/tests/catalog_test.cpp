#include "test_support.hpp"

#include "dscms/traceability.hpp"

#include <gmock/gmock.h>

namespace dscms {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;
using namespace dscms::testing;

/// Builds a series whose aggregate under `spi` equals `value` at `now`.
std::vector<Observation> series_for(const SpiDef& spi, double value, Timestamp now) {
    const auto inside = now - std::chrono::days{1};
    std::vector<Observation> out;
    switch (spi.aggregation) {
        case Aggregation::count_window:
            for (int i = 0; i < static_cast<int>(value); ++i) {
                out.push_back(obs(spi.id, inside - std::chrono::hours{i}, 1));
            }
            break;
        case Aggregation::mom_percent_change: {
            const auto previous = now - std::chrono::days{spi.window_days} - std::chrono::days{1};
            out.push_back(obs(spi.id, previous, 100.0));
            out.push_back(obs(spi.id, inside, 100.0 * (1.0 + value / 100.0)));
            break;
        }
        default:
            out.push_back(obs(spi.id, inside, value));
            break;
    }
    std::sort(out.begin(), out.end(), ObservationOrder{});
    return out;
}

TEST(Catalog, BundledRowsMatchAnnotations) {
    const auto now = at("2025-06-01T00:00:00Z");
    const auto catalog = bundled_catalog(now);
    const auto safety_case = bundled_case();
    ASSERT_EQ(catalog.size(), 161u);

    int checked = 0;
    for (const auto& [id, spi] : catalog.defs()) {
        ASSERT_TRUE(spi.annotation.has_value()) << id;
        const auto& note = *spi.annotation;
        ASSERT_NE(safety_case.find(spi.claim), nullptr) << id << " names unknown claim " << spi.claim;

        const bool by_comparator =
            !spi.threshold.is_trend_only() && compare(spi.comparator, note.example_value, *spi.threshold.value());
        EXPECT_EQ(by_comparator, note.example_breached) << id << ": " << note.example_text << " vs "
                                                        << note.threshold_text;

        const auto status = evaluate(spi, series_for(spi, note.example_value, now), now, now);
        ASSERT_TRUE(status.value.has_value()) << id;
        EXPECT_NEAR(*status.value, note.example_value, 1e-9) << id;
        EXPECT_EQ(status.breached, note.example_breached) << id;
        ++checked;
    }
    EXPECT_EQ(checked, 161);
}

TEST(Catalog, DuplicatePublishedRowsWereRenumbered) {
    const auto catalog = bundled_catalog(day(0));
    std::set<std::string> titles;
    for (int i = 1; i <= 8; ++i) {
        const auto* spi = catalog.find("C5.2-SPI-" + std::to_string(i));
        ASSERT_NE(spi, nullptr) << i;
        titles.insert(spi->title);
    }
    EXPECT_EQ(titles.size(), 8u);
    EXPECT_EQ(catalog.find("C5.2-SPI-9"), nullptr);
}

TEST(Catalog, DuplicateIdsAcrossDocumentsAreRejected) {
    const auto docs = fixtures::catalog_documents();
    std::vector<std::string> twice{docs.front(), docs.front()};
    const auto r = load_catalog(twice, day(0));
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.error().code, "duplicate-id");
}

TEST(Traceability, BundledCaseAndCatalogAreFullyTraced) {
    EXPECT_THAT(validate_traceability(bundled_case(), bundled_catalog(day(0))), IsEmpty());
}

TEST(Traceability, UntracedLeafAndDanglingClaimAreReported) {
    const auto base = bundled_case();
    std::vector<ArgNode> nodes;
    for (const auto& [id, n] : base.nodes()) {
        nodes.push_back(n);
    }
    nodes.push_back({"C9.9", NodeKind::claim});
    auto edges = base.edges();
    edges.push_back({"C9.9", "C0", RelKind::supports, PropagationPolicy::flag});
    const auto c = SafetyCase::from_parts(base.case_id(), 1, nodes, edges, base.attachments());

    auto catalog = bundled_catalog(day(0));
    auto extra = indicator("Cxx-SPI-1", Aggregation::latest, Comparator::gte, Threshold::numeric(1));
    extra.claim = "Cxx";
    ASSERT_TRUE(catalog.add(extra).ok());

    EXPECT_THAT(validate_traceability(c, catalog),
                ElementsAre(Violation{"dangling-spi-claim", "Cxx-SPI-1"}, Violation{"untraced-leaf", "C9.9"}));
}

TEST(Traceability, AttachmentDisagreementIsReported) {
    const auto base = bundled_case();
    std::vector<ArgNode> nodes;
    for (const auto& [id, n] : base.nodes()) {
        nodes.push_back(n);
    }
    auto attachments = base.attachments();
    for (auto& a : attachments) {
        if (a.spi_id == "C2.1-SPI-1") {
            a.claim_id = "C2.2";
        }
    }
    const auto c = SafetyCase::from_parts(base.case_id(), 1, nodes, base.edges(), attachments);
    EXPECT_THAT(validate_traceability(c, bundled_catalog(day(0))),
                ElementsAre(Violation{"attachment-mismatch", "C2.1-SPI-1"}));
}

}  // namespace
}  // namespace dscms
