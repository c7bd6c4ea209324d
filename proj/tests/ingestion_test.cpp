#include "test_support.hpp"

#include "dscms/ingestion.hpp"

#include <gmock/gmock.h>

#include <algorithm>

namespace dscms {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;
using namespace dscms::testing;

std::vector<Json> feed_records() {
    std::vector<Json> out;
    const auto text = fixtures::file("feeds/cti_sample.jsonl");
    EXPECT_TRUE(text.has_value());
    std::string_view rest = text.value_or("");
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        const auto line = rest.substr(0, nl);
        if (!line.empty()) {
            out.push_back(Json::parse(line));
        }
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    }
    return out;
}

std::vector<FeedMapping> bundled_mappings() {
    auto m = parse_feed_mappings(fixtures::file("feeds/cti_mapping.json").value_or(""));
    EXPECT_TRUE(m.ok());
    return std::move(m).value();
}

TEST(Ingestion, ParsesWellFormedLines) {
    const auto r = parse_observations(
        R"({"ts":"2025-02-01T00:00:00Z","spi":"C2.1-SPI-1","value":1,"source":"incidents"})"
        "\n\n"
        R"({"ts":"2025-02-02T01:00:00+01:00","spi":"C2.1-SPI-2","value":2.5,"source":"cyber-threat-intelligence","meta":{"ref":"A"}})"
        "\n");
    ASSERT_THAT(r.errors, IsEmpty());
    ASSERT_EQ(r.observations.size(), 2u);
    EXPECT_EQ(r.observations[1].ts, at("2025-02-02T00:00:00Z"));
    EXPECT_EQ(r.observations[1].source, EvidenceSource::cyber_threat_intelligence);
    EXPECT_EQ(r.observations[1].meta.at("ref"), "A");
}

TEST(Ingestion, ReportsEachBadLineWithItsNumber) {
    const auto r = parse_observations(
        "not json\n"
        R"({"ts":"2025-02-01","spi":"X","value":1,"source":"incidents"})"
        "\n"
        R"({"ts":"2025-02-01T00:00:00Z","value":1,"source":"incidents"})"
        "\n"
        R"({"ts":"2025-02-01T00:00:00Z","spi":"X","value":"high","source":"incidents"})"
        "\n"
        R"({"ts":"2025-02-01T00:00:00Z","spi":"X","value":1,"source":"rumours"})"
        "\n"
        R"({"ts":"2025-02-01T00:00:00Z","spi":"X","value":1,"source":"incidents"})"
        "\n");
    ASSERT_EQ(r.observations.size(), 1u);
    std::vector<std::pair<std::size_t, std::string>> got;
    for (const auto& e : r.errors) {
        got.emplace_back(e.line, e.code);
    }
    EXPECT_THAT(got, ElementsAre(std::pair<std::size_t, std::string>{1, "bad-record"},
                                 std::pair<std::size_t, std::string>{2, "bad-timestamp"},
                                 std::pair<std::size_t, std::string>{3, "missing-field"},
                                 std::pair<std::size_t, std::string>{4, "bad-value"},
                                 std::pair<std::size_t, std::string>{5, "unknown-source"}));
}

TEST(Ingestion, RejectsNonFiniteValues) {
    const auto r = parse_observations(R"({"ts":"2025-02-01T00:00:00Z","spi":"X","value":1e999,"source":"incidents"})");
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors.front().code, "non-finite-value");
}

TEST(Ingestion, FormatRoundTrips) {
    const auto s = bundled_scenario("scenario-1");
    const auto text = format_observations(s.observations);
    const auto back = parse_observations(text);
    ASSERT_THAT(back.errors, IsEmpty());
    EXPECT_EQ(back.observations, s.observations);
}

TEST(Ingestion, MapFeedRoutesRecordToIndicator) {
    const auto mappings = bundled_mappings();
    EXPECT_THAT(validate_mappings(mappings, bundled_catalog(day(0))), IsEmpty());

    const Json ttp = Json::parse(R"({"ts":"2025-02-03T10:00:00Z","type":"new-ttp","attack":"conventional"})");
    const auto result = map_feed(std::vector<Json>{ttp}, mappings);
    ASSERT_EQ(result.observations.size(), 1u);
    EXPECT_EQ(result.observations.front().spi, "C2.1-SPI-13");
    EXPECT_EQ(result.observations.front().value, 1.0);
    EXPECT_EQ(result.observations.front().source, EvidenceSource::cyber_threat_intelligence);
    EXPECT_THAT(result.unmatched, IsEmpty());
}

TEST(Ingestion, MapFeedUsesValueFieldsAndReportsUnmatched) {
    const auto records = feed_records();
    const auto result = map_feed(records, bundled_mappings());
    EXPECT_THAT(result.errors, IsEmpty());
    ASSERT_EQ(result.unmatched.size(), 1u);
    EXPECT_EQ(records[result.unmatched.front()].at("type"), "vendor-advisory");

    bool saw_loss = false;
    bool saw_delay = false;
    for (const auto& o : result.observations) {
        if (o.spi == "C2.1-SPI-2") {
            saw_loss = true;
            EXPECT_EQ(o.value, 42000.0);
        }
        if (o.spi == "C2.1-SPI-3") {
            saw_delay = true;
            EXPECT_EQ(o.value, 4.0);
        }
    }
    EXPECT_TRUE(saw_loss);
    EXPECT_TRUE(saw_delay);
}

TEST(Ingestion, UnknownTargetIndicatorIsFlagged) {
    auto mappings = bundled_mappings();
    mappings.front().target_spi = "C9.9-SPI-1";
    EXPECT_THAT(validate_mappings(mappings, bundled_catalog(day(0))),
                ElementsAre(Violation{"unknown-target-spi", "C9.9-SPI-1"}));
}

TEST(Ingestion, ReingestingIsIdempotent) {
    const auto s = bundled_scenario("scenario-2");
    ObservationStore store;
    const auto first = ingest(store, s.observations);
    EXPECT_EQ(first.accepted, s.observations.size());
    EXPECT_TRUE(first.evaluation_trigger);
    const auto snapshot = store;
    const auto second = ingest(store, s.observations);
    EXPECT_EQ(second.accepted, 0u);
    EXPECT_EQ(second.deduplicated, s.observations.size());
    EXPECT_FALSE(second.evaluation_trigger);
    EXPECT_EQ(store, snapshot);
}

TEST(IngestionProperty, StoreIsIndependentOfArrivalOrderAndDuplicates) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> when(0, 60);
    std::uniform_int_distribution<int> pick(0, 4);
    const std::vector<std::string> ids{"A", "B", "C", "D", "E"};
    for (int round = 0; round < 100; ++round) {
        std::vector<Observation> batch;
        for (int i = 0; i < 30; ++i) {
            batch.push_back(obs(ids[pick(rng)], day(when(rng)), pick(rng)));
        }
        ObservationStore ordered;
        ingest(ordered, batch);

        auto shuffled = batch;
        shuffled.insert(shuffled.end(), batch.begin(), batch.begin() + 10);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        ObservationStore mixed;
        ingest(mixed, shuffled);
        ASSERT_EQ(ordered, mixed);
        ingest(mixed, batch);
        ASSERT_EQ(ordered, mixed);
        for (const auto& id : mixed.spis()) {
            const auto series = mixed.for_spi(id);
            EXPECT_TRUE(std::is_sorted(series.begin(), series.end(), ObservationOrder{}));
        }
    }
}

}  // namespace
}  // namespace dscms
