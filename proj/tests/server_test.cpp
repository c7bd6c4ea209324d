#include "test_support.hpp"

#include "dscms/api.hpp"
#include "http_server.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

namespace dscms {
namespace {

using namespace dscms::testing;

class ServerFixture : public ::testing::Test {
protected:
    void SetUp() override {
        auto state = bundled_state(day(0));
        ASSERT_TRUE(state.ok());
        engine_ = Engine::in_memory(std::move(state).value());
        AccessPolicy policy;
        policy.add_token("rso-token", Role::responsible_scaling_officer);
        policy.add_token("oversight-token", Role::external_oversight);
        api_ = std::make_unique<Api>(*engine_, std::move(policy));
        server_ = std::make_unique<http::Server>(*api_, std::chrono::milliseconds{20});
        port_ = server_->bind_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_->serve_bound(); });
        server_->wait_until_ready();
    }

    void TearDown() override {
        if (server_) {
            server_->stop();
        }
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    httplib::Client client(const std::string& token = "rso-token") const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(5, 0);
        c.set_bearer_token_auth(token);
        return c;
    }

    std::unique_ptr<Engine> engine_;
    std::unique_ptr<Api> api_;
    std::unique_ptr<http::Server> server_;
    int port_ = -1;
    std::thread thread_;
};

TEST_F(ServerFixture, ServesJsonOverSockets) {
    auto c = client();
    const auto status = c.Get("/status");
    ASSERT_TRUE(status);
    EXPECT_EQ(status->status, 200);
    EXPECT_EQ(Json::parse(status->body).at("case_id"), engine_->snapshot()->safety_case.case_id());

    const auto sim = c.Post("/scenario", R"({"name":"scenario-2"})", "application/json");
    ASSERT_TRUE(sim);
    EXPECT_EQ(sim->status, 200);
    const auto impact = c.Get("/impact");
    ASSERT_TRUE(impact);
    EXPECT_EQ(impact->body, serialize_report(*engine_->snapshot()->last_report));

    const auto observations = c.Post("/observations?at=2025-04-01T00:00:00Z", "broken\n", "application/x-ndjson");
    ASSERT_TRUE(observations);
    EXPECT_EQ(observations->status, 422);
}

TEST_F(ServerFixture, ErrorsUseJsonBodies) {
    auto anonymous = httplib::Client("127.0.0.1", port_);
    const auto unauth = anonymous.Get("/status");
    ASSERT_TRUE(unauth);
    EXPECT_EQ(unauth->status, 401);

    auto reader = client("oversight-token");
    const auto forbidden = reader.Post("/revalidate", "{}", "application/json");
    ASSERT_TRUE(forbidden);
    EXPECT_EQ(forbidden->status, 403);

    const auto missing = reader.Get("/nowhere");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(Json::parse(missing->body).at("error"), "not-found");
}

TEST_F(ServerFixture, FollowStreamDeliversNewEvents) {
    std::string received;
    std::atomic<bool> saw_alert{false};
    std::thread follower([&] {
        auto c = client("oversight-token");
        c.Get("/events?follow=true&since=0", [&](const char* data, std::size_t size) {
            received.append(data, size);
            if (received.find(R"("type":"alert")") != std::string::npos) {
                saw_alert = true;
                return false;
            }
            return true;
        });
    });
    std::this_thread::sleep_for(std::chrono::milliseconds{100});
    ASSERT_TRUE(engine_->simulate("scenario-1", "rso").ok());
    follower.join();
    EXPECT_TRUE(saw_alert);
    const auto first_line = received.substr(0, received.find('\n'));
    EXPECT_TRUE(Json::parse(first_line).is_object());
}

}  // namespace
}  // namespace dscms
