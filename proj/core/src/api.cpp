#include "dscms/api.hpp"

#include "dscms/audit.hpp"
#include "dscms/ingestion.hpp"
#include "json_io.hpp"

#include <charconv>

namespace dscms {

namespace {

constexpr std::string_view kJson = "application/json";
constexpr std::string_view kNdjson = "application/x-ndjson";
constexpr std::string_view kBearer = "Bearer ";

ApiResponse json_response(int status, const Json& body) {
    return {status, std::string(kJson), body.dump() + "\n"};
}

int status_for(const std::vector<Error>& errors) {
    for (const auto& e : errors) {
        if (e.code == "stale-version") {
            return 409;
        }
        if (e.code == "io-error") {
            return 500;
        }
    }
    return 422;
}

std::optional<std::string> query_value(const ApiRequest& request, const std::string& key) {
    const auto it = request.query.find(key);
    if (it == request.query.end()) {
        return std::nullopt;
    }
    return it->second;
}

/// Parses an optional JSON object body; an empty body is an empty object.
Result<Json> object_body(const ApiRequest& request) {
    if (request.body.find_first_not_of(" \t\r\n") == std::string::npos) {
        return Json::object();
    }
    auto doc = detail::parse_document(request.body, "request body");
    if (!doc) {
        return doc;
    }
    if (!doc.value().is_object()) {
        return Error::make("bad-request", "request body must be a JSON object");
    }
    return doc;
}

std::optional<std::string> string_field(const Json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        return std::nullopt;
    }
    return it->get<std::string>();
}

}  // namespace

std::map<std::string, std::set<Role>> AccessPolicy::default_scopes() {
    const std::set<Role> everyone{Role::responsible_scaling_officer, Role::executive_leadership, Role::safety_team,
                                  Role::external_oversight};
    const std::set<Role> internal{Role::responsible_scaling_officer, Role::executive_leadership, Role::safety_team};
    std::map<std::string, std::set<Role>> scopes;
    for (const auto& route : api_routes()) {
        scopes[route] = route.starts_with("GET ") ? everyone : internal;
    }
    return scopes;
}

Result<AccessPolicy> AccessPolicy::parse(std::string_view document) {
    auto doc = detail::parse_document(document, "token file");
    if (!doc) {
        return std::move(doc).errors();
    }
    const Json& j = doc.value();
    if (!j.is_object() || !j.contains("tokens") || !j.at("tokens").is_array()) {
        return Error::make("bad-token-file", "token file needs a 'tokens' list");
    }
    AccessPolicy policy;
    std::vector<Error> errors;
    for (std::size_t i = 0; i < j.at("tokens").size(); ++i) {
        const Json& entry = j.at("tokens").at(i);
        const std::string where = "tokens[" + std::to_string(i) + "]";
        const auto token = entry.is_object() ? string_field(entry, "token") : std::nullopt;
        const auto role_text = entry.is_object() ? string_field(entry, "role") : std::nullopt;
        const auto role = role_text ? parse_role(*role_text) : std::nullopt;
        if (!token || token->empty() || !role) {
            errors.push_back(Error::make("bad-token-file", "entry needs a non-empty token and a known role", where));
            continue;
        }
        policy.add_token(*token, *role);
    }
    if (j.contains("scopes")) {
        const Json& scopes = j.at("scopes");
        if (!scopes.is_object()) {
            errors.push_back(Error::make("bad-token-file", "'scopes' must be an object"));
        } else {
            for (const auto& [route, roles] : scopes.items()) {
                if (!api_routes().contains(route)) {
                    errors.push_back(Error::make("bad-token-file", "unknown route", route));
                    continue;
                }
                std::set<Role> allowed;
                bool ok = roles.is_array();
                for (const auto& r : ok ? roles : Json::array()) {
                    const auto role = r.is_string() ? parse_role(r.get<std::string>()) : std::nullopt;
                    if (!role) {
                        ok = false;
                        break;
                    }
                    allowed.insert(*role);
                }
                if (!ok) {
                    errors.push_back(Error::make("bad-token-file", "scope must list known roles", route));
                    continue;
                }
                policy.scopes_[route] = std::move(allowed);
            }
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return policy;
}

std::optional<Role> AccessPolicy::role_for(std::string_view token) const {
    const auto it = tokens_.find(token);
    if (it == tokens_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool AccessPolicy::allowed(std::string_view route, Role role) const {
    const auto it = scopes_.find(std::string(route));
    return it != scopes_.end() && it->second.contains(role);
}

const std::set<std::string>& api_routes() {
    static const std::set<std::string> routes{
        "GET /case",         "GET /status",      "GET /impact",        "GET /audit",
        "GET /report",       "GET /events",      "POST /observations", "POST /scenario",
        "POST /recovery",    "POST /revalidate", "POST /gate",
    };
    return routes;
}

ApiResponse error_response(int status, const std::vector<Error>& errors) {
    Json body;
    body["error"] = errors.empty() ? "error" : errors.front().code;
    body["message"] = errors.empty() ? "" : errors.front().message;
    Json details = Json::array();
    for (const auto& e : errors) {
        Json d;
        d["code"] = e.code;
        d["message"] = e.message;
        if (!e.location.empty()) {
            d["location"] = e.location;
        }
        details.push_back(std::move(d));
    }
    body["details"] = std::move(details);
    return json_response(status, body);
}

std::string format_events(std::span<const EventRecord> events) {
    std::string out;
    for (const auto& e : events) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

std::variant<Role, ApiResponse> Api::authorize(const ApiRequest& request) const {
    const std::string route = request.method + " " + request.path;
    if (!api_routes().contains(route)) {
        bool path_known = false;
        for (const auto& r : api_routes()) {
            path_known = path_known || r.substr(r.find(' ') + 1) == request.path;
        }
        return path_known ? error_response(405, {Error::make("method-not-allowed", "method not allowed", route)})
                          : error_response(404, {Error::make("not-found", "no such endpoint", request.path)});
    }
    if (!request.authorization.starts_with(kBearer)) {
        return error_response(401, {Error::make("unauthenticated", "missing bearer token")});
    }
    const auto role = policy_.role_for(std::string_view(request.authorization).substr(kBearer.size()));
    if (!role) {
        return error_response(401, {Error::make("unauthenticated", "unknown token")});
    }
    if (!policy_.allowed(route, *role)) {
        return error_response(403, {Error::make("forbidden",
                                                "role " + std::string(to_string(*role)) + " may not call " + route)});
    }
    return *role;
}

ApiResponse Api::handle(const ApiRequest& request) {
    auto auth = authorize(request);
    if (auto* denied = std::get_if<ApiResponse>(&auth)) {
        return *denied;
    }
    const Role role = std::get<Role>(auth);
    const std::string route = request.method + " " + request.path;
    if (route == "GET /case") {
        return get_case();
    }
    if (route == "GET /status") {
        return get_status();
    }
    if (route == "GET /impact") {
        return get_impact();
    }
    if (route == "GET /audit") {
        return get_audit(request);
    }
    if (route == "GET /report") {
        return get_report();
    }
    if (route == "GET /events") {
        return get_events(request);
    }
    if (route == "POST /observations") {
        return post_observations(request, role);
    }
    if (route == "POST /scenario") {
        return post_scenario(request, role);
    }
    if (route == "POST /recovery") {
        return post_recovery(request, role);
    }
    if (route == "POST /revalidate") {
        return post_revalidate(request, role);
    }
    return post_gate(request, role);
}

Result<Timestamp> Api::time_param(std::optional<std::string> text) const {
    if (!text) {
        return clock_();
    }
    const auto ts = parse_timestamp(*text);
    if (!ts) {
        return Error::make("bad-timestamp", "not an RFC 3339 timestamp with zone", *text);
    }
    return *ts;
}

ApiResponse Api::get_case() const {
    return {200, std::string(kJson), serialize_case(engine_.snapshot()->safety_case)};
}

ApiResponse Api::get_status() const {
    const auto state = engine_.snapshot();
    Json body;
    body["case_id"] = state->safety_case.case_id();
    body["case_version"] = state->safety_case.version();
    body["evaluated_at"] = state->clock ? Json(format_timestamp(*state->clock)) : Json(nullptr);
    Json claims = Json::array();
    for (const auto& [id, node] : state->safety_case.nodes()) {
        claims.push_back({{"id", id}, {"kind", to_string(node.kind)}, {"status", to_string(node.status)}});
    }
    body["nodes"] = std::move(claims);
    Json spis = Json::array();
    for (const auto& s : state->statuses) {
        spis.push_back(to_json(s));
    }
    body["spis"] = std::move(spis);
    Json open = Json::array();
    for (const auto& r : state->open_recoveries) {
        open.push_back(to_json(r));
    }
    body["open_recoveries"] = std::move(open);
    Json gates = Json::array();
    for (const auto& g : state->gates) {
        gates.push_back(to_json(g));
    }
    body["gates"] = std::move(gates);
    body["last_alert"] = state->last_alert ? to_json(*state->last_alert) : Json(nullptr);
    body["audit_head"] = state->audit_head;
    return json_response(200, body);
}

ApiResponse Api::get_impact() const {
    const auto state = engine_.snapshot();
    if (!state->last_report) {
        return error_response(404, {Error::make("no-report", "no consistency check has run yet")});
    }
    return {200, std::string(kJson), serialize_report(*state->last_report)};
}

ApiResponse Api::get_audit(const ApiRequest& request) const {
    std::uint64_t since = 0;
    if (const auto text = query_value(request, "since")) {
        const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), since);
        if (ec != std::errc{} || ptr != text->data() + text->size()) {
            return error_response(422, {Error::make("bad-query", "since must be a sequence number", *text)});
        }
    }
    const auto verdict = verify_chain(engine_.audit().text());
    Json body;
    body["verified"] = verdict.ok;
    if (!verdict.ok) {
        body["first_bad"] = verdict.first_bad ? Json(*verdict.first_bad) : Json(nullptr);
        body["reason"] = verdict.reason;
    }
    body["head"] = engine_.audit().head_digest();
    Json records = Json::array();
    for (const auto& r : engine_.audit().records()) {
        if (r.seq > since) {
            records.push_back(to_json(r));
        }
    }
    body["records"] = std::move(records);
    return json_response(200, body);
}

ApiResponse Api::get_report() const {
    const auto state = engine_.snapshot();
    return {200, std::string(kJson), render_governance_report(report_inputs(*state))};
}

ApiResponse Api::get_events(const ApiRequest& request) const {
    std::uint64_t since = 0;
    if (const auto text = query_value(request, "since")) {
        const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), since);
        if (ec != std::errc{} || ptr != text->data() + text->size()) {
            return error_response(422, {Error::make("bad-query", "since must be a sequence number", *text)});
        }
    }
    const auto events = engine_.events_since(since);
    return {200, std::string(kNdjson), format_events(events)};
}

ApiResponse Api::post_observations(const ApiRequest& request, Role role) {
    auto at = time_param(query_value(request, "at"));
    if (!at) {
        return error_response(422, at.errors());
    }
    auto parsed = parse_observations(request.body);
    if (!parsed.errors.empty()) {
        std::vector<Error> errors;
        for (const auto& e : parsed.errors) {
            errors.push_back(Error::make(e.code, e.message, "line " + std::to_string(e.line)));
        }
        return error_response(422, errors);
    }
    auto outcome = engine_.ingest(std::move(parsed.observations), at.value(), std::string(to_string(role)));
    if (!outcome) {
        return error_response(status_for(outcome.errors()), outcome.errors());
    }
    return json_response(200, to_json(outcome.value()));
}

ApiResponse Api::post_scenario(const ApiRequest& request, Role role) {
    auto body = object_body(request);
    if (!body) {
        return error_response(422, body.errors());
    }
    const auto name = string_field(body.value(), "name");
    if (!name) {
        return error_response(422, {Error::make("missing-field", "missing field 'name'")});
    }
    auto outcome = engine_.simulate(*name, std::string(to_string(role)));
    if (!outcome) {
        return error_response(status_for(outcome.errors()), outcome.errors());
    }
    Json out = to_json(outcome.value());
    out["scenario"] = *name;
    return json_response(200, out);
}

ApiResponse Api::post_recovery(const ApiRequest& request, Role role) {
    auto body = object_body(request);
    if (!body) {
        return error_response(422, body.errors());
    }
    const Json& doc = body.value();
    if (!doc.contains("base_version") || !doc.at("base_version").is_number_integer()) {
        return error_response(422, {Error::make("missing-field", "base_version must be an integer")});
    }
    if (!doc.contains("actions")) {
        return error_response(422, {Error::make("missing-field", "missing field 'actions'")});
    }
    auto actions = parse_recovery_actions(doc.at("actions"));
    if (!actions) {
        return error_response(422, actions.errors());
    }
    auto at = time_param(string_field(doc, "at"));
    if (!at) {
        return error_response(422, at.errors());
    }
    auto committed = engine_.recover(doc.at("base_version").get<int>(), actions.value(), at.value(),
                                     std::string(to_string(role)));
    if (!committed) {
        return error_response(status_for(committed.errors()), committed.errors());
    }
    return json_response(200, {{"version", committed.value().version}, {"diff", committed.value().diff}});
}

ApiResponse Api::post_revalidate(const ApiRequest& request, Role role) {
    auto body = object_body(request);
    if (!body) {
        return error_response(422, body.errors());
    }
    auto at = time_param(string_field(body.value(), "at"));
    if (!at) {
        return error_response(422, at.errors());
    }
    auto report = engine_.revalidate(at.value(), std::string(to_string(role)));
    if (!report) {
        return error_response(status_for(report.errors()), report.errors());
    }
    return json_response(200, {{"clean", report.value().clean}, {"residual", to_json(report.value().residual)}});
}

ApiResponse Api::post_gate(const ApiRequest& request, Role role) {
    auto body = object_body(request);
    if (!body) {
        return error_response(422, body.errors());
    }
    const auto gate = string_field(body.value(), "gate");
    if (!gate) {
        return error_response(422, {Error::make("missing-field", "missing field 'gate'")});
    }
    auto at = time_param(string_field(body.value(), "at"));
    if (!at) {
        return error_response(422, at.errors());
    }
    auto result = engine_.evaluate_gate(*gate, at.value(), std::string(to_string(role)));
    if (!result) {
        return error_response(status_for(result.errors()), result.errors());
    }
    return json_response(200, to_json(result.value()));
}

}  // namespace dscms
