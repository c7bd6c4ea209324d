#pragma once

#include "dscms/api.hpp"

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace dscms::http {

/// Serves an Api over HTTP/1.1. `GET /events?follow=true` keeps the
/// connection open and streams one JSON record per line as events arrive.
class Server {
public:
    explicit Server(Api& api, std::chrono::milliseconds poll_interval = std::chrono::milliseconds(250));
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves until stop(); returns false if binding failed.
    bool listen(const std::string& host, int port);
    /// Binds to a free port and returns it, or -1.
    int bind_any_port(const std::string& host);
    /// Serves on a socket bound by bind_any_port.
    bool serve_bound();
    void stop();
    void wait_until_ready() const;

private:
    void install_routes();

    Api& api_;
    std::chrono::milliseconds poll_interval_;
    std::unique_ptr<httplib::Server> server_;
    std::atomic<bool> stopping_{false};
};

}  // namespace dscms::http
