#include "bedside/http_server.hpp"

#include "bedside/error.hpp"

#include <httplib.h>

namespace bedside::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const ConflictError& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const ParseError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const json::exception& e) {
        send_json(res, 400, {{"error", std::string("bad request body: ") + e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

std::optional<double> opt_number(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ValidationError(std::string(key) + " must be a number");
    return it->get<double>();
}

} // namespace

std::unique_ptr<httplib::Server> make_http_server(SessionManager& sessions, const HttpOptions& opts) {
    auto server = std::make_unique<httplib::Server>();
    auto& s = *server;
    s.set_default_headers({{"Access-Control-Allow-Origin", opts.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
    s.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    s.Post("/v1/sessions", [&sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = body_of(req);
            auto created = sessions.create_session(body.value("pack", std::string("sophie")));
            send_json(res, 201, {{"id", created.id}, {"opener", created.opener}});
        });
    });
    s.Post(R"(/v1/sessions/([^/]+)/utterance)", [&sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = body_of(req);
            if (!body.contains("text") || !body["text"].is_string()) throw ValidationError("text is required");
            auto bundle = sessions.post_utterance(req.matches[1], body["text"].get<std::string>(),
                                                  opt_number(body, "t_start"), opt_number(body, "t_end"));
            send_json(res, 200, bundle.to_json());
        });
    });
    s.Post(R"(/v1/sessions/([^/]+)/end)", [&sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, sessions.end_session(req.matches[1]).to_json()); });
    });
    s.Get(R"(/v1/sessions/([^/]+)/transcript)", [&sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, to_json(sessions.transcript(req.matches[1]))); });
    });
    return server;
}

void serve(SessionManager& sessions, const HttpOptions& opts) {
    auto server = make_http_server(sessions, opts);
    if (!server->listen(opts.host, opts.port))
        throw Error("cannot listen on " + opts.host + ":" + std::to_string(opts.port));
}

} // namespace bedside::service
