#include "test_support.hpp"

#include "dscms/api.hpp"

#include <gmock/gmock.h>

namespace dscms {
namespace {

using namespace dscms::testing;

class ApiFixture : public ::testing::Test {
protected:
    void SetUp() override {
        auto state = bundled_state(day(0));
        ASSERT_TRUE(state.ok());
        engine_ = Engine::in_memory(std::move(state).value());
        AccessPolicy policy;
        policy.add_token("rso-token", Role::responsible_scaling_officer);
        policy.add_token("exec-token", Role::executive_leadership);
        policy.add_token("team-token", Role::safety_team);
        policy.add_token("oversight-token", Role::external_oversight);
        api_ = std::make_unique<Api>(*engine_, std::move(policy), [] { return at("2025-04-01T00:00:00Z"); });
    }

    ApiResponse call(std::string method, std::string path, std::string token, std::string body = {},
                     std::map<std::string, std::string> query = {}) {
        ApiRequest r;
        r.method = std::move(method);
        r.path = std::move(path);
        r.query = std::move(query);
        if (!token.empty()) {
            r.authorization = "Bearer " + token;
        }
        r.body = std::move(body);
        return api_->handle(r);
    }

    static Json body_of(const ApiResponse& r) { return Json::parse(r.body); }

    std::unique_ptr<Engine> engine_;
    std::unique_ptr<Api> api_;
};

TEST_F(ApiFixture, RolesAndScopesAreEnforced) {
    for (const auto* token : {"rso-token", "exec-token", "team-token", "oversight-token"}) {
        for (const auto* path : {"/case", "/status", "/audit", "/report", "/events"}) {
            EXPECT_EQ(call("GET", path, token).status, 200) << token << " " << path;
        }
    }
    EXPECT_EQ(call("POST", "/scenario", "oversight-token", R"({"name":"scenario-4"})").status, 403);
    EXPECT_EQ(call("POST", "/scenario", "team-token", R"({"name":"scenario-4"})").status, 200);
    EXPECT_EQ(call("GET", "/status", "").status, 401);
    EXPECT_EQ(call("GET", "/status", "nobody").status, 401);

    ApiRequest basic;
    basic.method = "GET";
    basic.path = "/status";
    basic.authorization = "Basic cnNvOnJzbw==";
    EXPECT_EQ(api_->handle(basic).status, 401);

    const auto forbidden = call("POST", "/revalidate", "oversight-token", "{}");
    EXPECT_EQ(forbidden.status, 403);
    EXPECT_EQ(body_of(forbidden).at("error"), "forbidden");
}

TEST_F(ApiFixture, CustomScopesReplaceDefaults) {
    auto policy = AccessPolicy::parse(
        R"({"tokens":[{"token":"t1","role":"safety_team"},{"token":"t2","role":"responsible_scaling_officer"}],)"
        R"("scopes":{"POST /recovery":["responsible_scaling_officer"]}})");
    ASSERT_TRUE(policy.ok());
    EXPECT_EQ(policy.value().role_for("t1"), Role::safety_team);
    EXPECT_FALSE(policy.value().allowed("POST /recovery", Role::safety_team));
    EXPECT_TRUE(policy.value().allowed("POST /recovery", Role::responsible_scaling_officer));
    EXPECT_TRUE(policy.value().allowed("POST /revalidate", Role::safety_team));

    const auto bad = AccessPolicy::parse(R"({"tokens":[{"token":"","role":"janitor"}]})");
    ASSERT_FALSE(bad.ok());
    EXPECT_EQ(bad.error().code, "bad-token-file");
    EXPECT_FALSE(AccessPolicy::parse(R"({"tokens":[],"scopes":{"GET /nowhere":[]}})").ok());
}

TEST_F(ApiFixture, UnknownRoutesAndMethods) {
    const auto missing = call("GET", "/nothing", "rso-token");
    EXPECT_EQ(missing.status, 404);
    EXPECT_EQ(body_of(missing).at("error"), "not-found");
    EXPECT_EQ(call("DELETE", "/status", "rso-token").status, 405);
    EXPECT_EQ(call("GET", "/impact", "rso-token").status, 404);
}

TEST_F(ApiFixture, ObservationsEndpointReportsLineErrors) {
    const auto bad = call("POST", "/observations", "team-token",
                          R"({"ts":"2025-03-01T00:00:00Z","spi":"C5.1-SPI-4","value":1,"source":"incidents"})"
                          "\nbroken\n",
                          {{"at", "2025-03-02T00:00:00Z"}});
    ASSERT_EQ(bad.status, 422);
    const auto details = body_of(bad).at("details");
    ASSERT_EQ(details.size(), 1u);
    EXPECT_EQ(details.at(0).at("location"), "line 2");
    EXPECT_EQ(engine_->audit().size(), 0u);

    EXPECT_EQ(call("POST", "/observations", "team-token", "", {{"at", "yesterday"}}).status, 422);

    const auto s = bundled_scenario("scenario-4");
    const auto ok = call("POST", "/observations", "team-token", format_observations(s.observations),
                         {{"at", format_timestamp(s.trigger)}});
    ASSERT_EQ(ok.status, 200) << ok.body;
    EXPECT_EQ(body_of(ok).at("accepted"), s.observations.size());

    const auto impact = call("GET", "/impact", "oversight-token");
    ASSERT_EQ(impact.status, 200);
    EXPECT_EQ(impact.body, serialize_report(*engine_->snapshot()->last_report));
}

TEST_F(ApiFixture, RecoveryConflictsOnStaleVersion) {
    ASSERT_EQ(call("POST", "/scenario", "rso-token", R"({"name":"scenario-2"})").status, 200);
    Json doc = Json::parse(fixtures::file("recovery/scenario-2.json").value_or("{}"));
    doc["at"] = "2025-04-01T00:00:00Z";
    const auto first = call("POST", "/recovery", "rso-token", doc.dump());
    ASSERT_EQ(first.status, 200) << first.body;
    EXPECT_EQ(body_of(first).at("version"), 2);
    const auto second = call("POST", "/recovery", "rso-token", doc.dump());
    EXPECT_EQ(second.status, 409);
    EXPECT_EQ(body_of(second).at("error"), "stale-version");

    EXPECT_EQ(call("POST", "/recovery", "rso-token", R"({"actions":[]})").status, 422);
    EXPECT_EQ(call("POST", "/recovery", "rso-token", "[1]").status, 422);

    const auto status = body_of(call("GET", "/status", "exec-token"));
    EXPECT_EQ(status.at("case_version"), 2);
    EXPECT_EQ(status.at("audit_head"), engine_->audit().head_digest());
}

TEST_F(ApiFixture, ScenarioGateAndAuditEndpoints) {
    EXPECT_EQ(call("POST", "/scenario", "rso-token", R"({"name":"nope"})").status, 422);
    EXPECT_EQ(call("POST", "/scenario", "rso-token", "{}").status, 422);
    const auto sim = call("POST", "/scenario", "rso-token", R"({"name":"scenario-1"})");
    ASSERT_EQ(sim.status, 200);

    const auto gate = call("POST", "/gate", "rso-token", R"({"gate":"G1"})");
    ASSERT_EQ(gate.status, 200);
    EXPECT_EQ(body_of(gate).at("passed"), false);
    EXPECT_EQ(call("POST", "/gate", "rso-token", R"({"gate":"G9"})").status, 422);

    const auto audit = body_of(call("GET", "/audit", "oversight-token"));
    EXPECT_EQ(audit.at("verified"), true);
    EXPECT_EQ(audit.at("records").size(), 2u);
    const auto tail = body_of(call("GET", "/audit", "oversight-token", "", {{"since", "1"}}));
    EXPECT_EQ(tail.at("records").size(), 1u);
    EXPECT_EQ(call("GET", "/audit", "oversight-token", "", {{"since", "x"}}).status, 422);

    const auto events = call("GET", "/events", "exec-token", "", {{"since", "0"}});
    ASSERT_EQ(events.status, 200);
    EXPECT_EQ(events.content_type, "application/x-ndjson");
    std::size_t lines = 0;
    for (const char ch : events.body) {
        lines += ch == '\n' ? 1 : 0;
    }
    EXPECT_EQ(lines, engine_->events_since(0).size());

    const auto report = Json::parse(call("GET", "/report", "exec-token").body);
    EXPECT_EQ(report.at("headline").at("severity"), "highest");
}

}  // namespace
}  // namespace dscms
