#pragma once

#include "bedside/service.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace bedside::service {

struct HttpOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Value of Access-Control-Allow-Origin.
    std::string cors_origin = "*";
};

/// Routes under /v1 bound to `sessions`. The manager must outlive the server.
std::unique_ptr<httplib::Server> make_http_server(SessionManager& sessions, const HttpOptions& opts = {});

/// Blocks until the server stops.
void serve(SessionManager& sessions, const HttpOptions& opts);

} // namespace bedside::service
