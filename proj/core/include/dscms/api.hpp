#pragma once

#include "dscms/engine.hpp"
#include "dscms/governance.hpp"
#include "dscms/result.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace dscms {

/// Bearer tokens and the roles allowed on each route ("METHOD /path").
class AccessPolicy {
public:
    /// Every role may read; the three internal roles may also write.
    [[nodiscard]] static std::map<std::string, std::set<Role>> default_scopes();

    /// Parses {"tokens":[{"token":..,"role":..}], "scopes":{"POST /recovery":[roles]}}.
    /// Listed scopes replace the defaults for their routes.
    [[nodiscard]] static Result<AccessPolicy> parse(std::string_view document);

    AccessPolicy() : scopes_(default_scopes()) {}

    void add_token(std::string token, Role role) { tokens_[std::move(token)] = role; }
    [[nodiscard]] std::optional<Role> role_for(std::string_view token) const;
    [[nodiscard]] bool allowed(std::string_view route, Role role) const;

private:
    std::map<std::string, Role, std::less<>> tokens_;
    std::map<std::string, std::set<Role>> scopes_;
};

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    /// Value of the Authorization header, if any.
    std::string authorization;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Maps requests onto engine calls and wire formats. Holds no transport.
class Api {
public:
    using Clock = std::function<Timestamp()>;

    Api(Engine& engine, AccessPolicy policy, Clock clock = now_utc)
        : engine_(engine), policy_(std::move(policy)), clock_(std::move(clock)) {}

    [[nodiscard]] ApiResponse handle(const ApiRequest& request);

    /// Resolves the caller's role, or the 401/403/404 response to send.
    [[nodiscard]] std::variant<Role, ApiResponse> authorize(const ApiRequest& request) const;

    [[nodiscard]] Engine& engine() noexcept { return engine_; }

private:
    ApiResponse get_case() const;
    ApiResponse get_status() const;
    ApiResponse get_impact() const;
    ApiResponse get_audit(const ApiRequest& request) const;
    ApiResponse get_report() const;
    ApiResponse get_events(const ApiRequest& request) const;
    ApiResponse post_observations(const ApiRequest& request, Role role);
    ApiResponse post_scenario(const ApiRequest& request, Role role);
    ApiResponse post_recovery(const ApiRequest& request, Role role);
    ApiResponse post_revalidate(const ApiRequest& request, Role role);
    ApiResponse post_gate(const ApiRequest& request, Role role);

    Result<Timestamp> time_param(std::optional<std::string> text) const;

    Engine& engine_;
    AccessPolicy policy_;
    Clock clock_;
};

/// Routes served by Api, as "METHOD /path".
[[nodiscard]] const std::set<std::string>& api_routes();

/// JSON error body: {"error":code,"message":..,"details":[..]}.
[[nodiscard]] ApiResponse error_response(int status, const std::vector<Error>& errors);

/// Renders events as newline-delimited JSON.
[[nodiscard]] std::string format_events(std::span<const EventRecord> events);

}  // namespace dscms
