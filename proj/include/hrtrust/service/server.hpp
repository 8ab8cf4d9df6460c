#pragma once

#include <memory>
#include <string>

#include "hrtrust/service/service.hpp"

namespace hrtrust {

/// HTTP/1.1 front end for a Service, plus WebSocket push at /sessions/{id}/events.
class HttpServer {
public:
    /// Binds immediately; port 0 picks a free port.
    HttpServer(Service& service, const std::string& bind, unsigned short port, unsigned threads = 2);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    [[nodiscard]] unsigned short port() const;
    /// Serves on background threads.
    void start();
    /// Blocks until stop() is called from another thread or a signal handler.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hrtrust
