#include "http_server.hpp"

#include <httplib.h>

#include <charconv>

namespace dscms::http {

namespace {

ApiRequest to_api_request(const httplib::Request& req) {
    ApiRequest out;
    out.method = req.method;
    out.path = req.path;
    for (const auto& [key, value] : req.params) {
        out.query.emplace(key, value);
    }
    out.authorization = req.get_header_value("Authorization");
    out.body = req.body;
    return out;
}

void write_response(httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body, api.content_type);
}

}  // namespace

Server::Server(Api& api, std::chrono::milliseconds poll_interval)
    : api_(api), poll_interval_(poll_interval), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

Server::~Server() {
    stop();
}

void Server::install_routes() {
    const auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        const ApiRequest request = to_api_request(req);
        const bool follow = request.method == "GET" && request.path == "/events" &&
                            request.query.contains("follow") && request.query.at("follow") == "true";
        if (!follow) {
            write_response(res, api_.handle(request));
            return;
        }
        auto auth = api_.authorize(request);
        if (auto* denied = std::get_if<ApiResponse>(&auth)) {
            write_response(res, *denied);
            return;
        }
        std::uint64_t since = 0;
        if (request.query.contains("since")) {
            const std::string& text = request.query.at("since");
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), since);
            if (ec != std::errc{} || ptr != text.data() + text.size()) {
                write_response(res, error_response(422, {Error::make("bad-query", "since must be a sequence number",
                                                                     text)}));
                return;
            }
        }
        res.status = 200;
        auto cursor = std::make_shared<std::uint64_t>(since);
        res.set_chunked_content_provider("application/x-ndjson", [this, cursor](std::size_t, httplib::DataSink& sink) {
            while (!stopping_.load()) {
                const auto events = api_.engine().wait_for_events(*cursor, poll_interval_);
                if (events.empty()) {
                    if (!sink.is_writable()) {
                        return false;
                    }
                    continue;
                }
                const std::string chunk = format_events(events);
                if (!sink.write(chunk.data(), chunk.size())) {
                    return false;
                }
                *cursor = events.back().seq;
                return true;
            }
            sink.done();
            return true;
        });
    };
    for (const auto& route : api_routes()) {
        const auto space = route.find(' ');
        const std::string method = route.substr(0, space);
        const std::string path = route.substr(space + 1);
        if (method == "GET") {
            server_->Get(path, dispatch);
        } else {
            server_->Post(path, dispatch);
        }
    }
    // Unknown paths and methods still get the JSON error body.
    server_->set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) {
            return;
        }
        const auto api = api_.authorize(to_api_request(req));
        if (const auto* response = std::get_if<ApiResponse>(&api)) {
            write_response(res, *response);
        }
    });
}

bool Server::listen(const std::string& host, int port) {
    return server_->listen(host, port);
}

int Server::bind_any_port(const std::string& host) {
    return server_->bind_to_any_port(host);
}

bool Server::serve_bound() {
    return server_->listen_after_bind();
}

void Server::stop() {
    stopping_.store(true);
    if (server_) {
        server_->stop();
    }
}

void Server::wait_until_ready() const {
    server_->wait_until_ready();
}

}  // namespace dscms::http
