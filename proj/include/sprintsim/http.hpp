#pragma once

// JSON-over-HTTP front end of SessionService plus a server-sent event stream
// of (session_id, version) notifications.

#include "sprintsim/error.hpp"
#include "sprintsim/service.hpp"

#include <memory>
#include <string>

namespace sprintsim
{
    // HTTP status for an error code (422 rule violations, 409 phase and
    // version conflicts, 404, 401, 400 for malformed requests).
    int http_status(ErrorCode code);

    class HttpServer
    {
    public:
        explicit HttpServer(SessionService &service);
        ~HttpServer();

        HttpServer(const HttpServer &) = delete;
        HttpServer &operator=(const HttpServer &) = delete;

        // port 0 picks a free port; returns the bound port.
        int bind(const std::string &host, int port);

        // Blocks until stop().
        void run();

        // Serves on a background thread.
        void start();
        void stop();

    private:
        struct Impl;
        std::unique_ptr<Impl> m_impl;
    };
}
