#include "sprintsim/http.hpp"
#include "sprintsim/defaults.hpp"
#include "sprintsim/serialize.hpp"

#include "httplib.h"

#include <atomic>
#include <thread>

namespace sprintsim
{
    int http_status(ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::Validation:
        case ErrorCode::Configuration:
        case ErrorCode::SpecialistMismatch:
        case ErrorCode::Lifecycle:
        case ErrorCode::OvertimeCap:
        case ErrorCode::Dependency:
        case ErrorCode::Absent:
        case ErrorCode::NoSolution:
            return 422;
        case ErrorCode::Phase:
        case ErrorCode::Conflict:
            return 409;
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::Auth:
            return 401;
        case ErrorCode::Format:
        case ErrorCode::Usage:
            return 400;
        case ErrorCode::Integrity:
        case ErrorCode::Io:
        case ErrorCode::Internal:
            return 500;
        }
        return 500;
    }

    namespace
    {
        void send_json(httplib::Response &res, int status, const json &body)
        {
            res.status = status;
            res.set_content(body.dump(), "application/json");
        }

        void send_error(httplib::Response &res, ErrorCode code, const std::string &message)
        {
            send_json(res, http_status(code), {{"error", error_code_name(code)}, {"message", message}});
        }

        std::string token_of(const httplib::Request &req)
        {
            const auto auth = req.get_header_value("Authorization");
            constexpr std::string_view bearer = "Bearer ";
            if (auth.starts_with(bearer))
            {
                return auth.substr(bearer.size());
            }
            return req.has_param("token") ? req.get_param_value("token") : std::string{};
        }

        json body_object(const httplib::Request &req)
        {
            if (req.body.empty())
            {
                return json::object();
            }
            json j = json::parse(req.body, nullptr, false);
            if (j.is_discarded() || !j.is_object())
            {
                throw SimError(ErrorCode::Format, "request body must be a JSON object");
            }
            return j;
        }

        // Runs a handler, translating simulator errors into JSON error bodies.
        template <typename F>
        httplib::Server::Handler guarded(F f)
        {
            return [f = std::move(f)](const httplib::Request &req, httplib::Response &res)
            {
                try
                {
                    f(req, res);
                }
                catch (const SimError &e)
                {
                    send_error(res, e.code(), e.what());
                }
                catch (const json::exception &e)
                {
                    send_error(res, ErrorCode::Validation, e.what());
                }
                catch (const std::exception &e)
                {
                    send_error(res, ErrorCode::Internal, e.what());
                }
            };
        }
    }

    struct HttpServer::Impl
    {
        explicit Impl(SessionService &s) : service(s) {}

        SessionService &service;
        httplib::Server server;
        std::thread thread;
        std::atomic<bool> stopping{false};

        void routes()
        {
            server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

            server.Post("/sessions", guarded([this](const httplib::Request &req, httplib::Response &res)
                                             {
                                                 const auto config = req.body.empty() ? default_config() : parse_config(req.body);
                                                 const auto created = service.create(config);
                                                 send_json(res, 201,
                                                           {{"id", created.id},
                                                            {"facilitator_token", created.facilitator_token},
                                                            {"team_token", created.team_token},
                                                            {"warnings", created.warnings},
                                                            {"version", service.version(created.id)}});
                                             }));

            server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                      {
                                                          const auto id = req.matches[1].str();
                                                          service.authorize(id, token_of(req), Access::Read);
                                                          send_json(res, 200, service.state_json(id));
                                                      }));

            server.Post(R"(/sessions/([^/]+)/teams/([^/]+)/commands)",
                        guarded([this](const httplib::Request &req, httplib::Response &res)
                                {
                                    const auto id = req.matches[1].str();
                                    service.authorize(id, token_of(req), Access::Team);
                                    json body = body_object(req);
                                    std::optional<std::int64_t> expected;
                                    if (body.contains("expected_version") && !body["expected_version"].is_null())
                                    {
                                        expected = body["expected_version"].get<std::int64_t>();
                                    }
                                    body.erase("expected_version");
                                    const auto command = parse_command(body.dump());
                                    if (std::holds_alternative<FacilitatorNote>(command))
                                    {
                                        service.authorize(id, token_of(req), Access::Facilitator);
                                    }
                                    const auto out = service.post_command(id, req.matches[2].str(), command, expected);
                                    send_json(res, 200, {{"version", out.version}, {"warnings", out.warnings}});
                                }));

            server.Post(R"(/sessions/([^/]+)/spin)", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                            {
                                                                const auto id = req.matches[1].str();
                                                                service.authorize(id, token_of(req), Access::Facilitator);
                                                                const auto body = body_object(req);
                                                                std::optional<int> day;
                                                                if (body.contains("day") && !body["day"].is_null())
                                                                {
                                                                    day = body["day"].get<int>();
                                                                }
                                                                const bool override_gate = body.value("override", false);
                                                                const auto out = service.spin_day(id, override_gate, day);
                                                                json outcomes = json::object();
                                                                for (const auto &[tid, o] : out.outcomes)
                                                                {
                                                                    outcomes[tid] = o;
                                                                }
                                                                send_json(res, 200,
                                                                          {{"version", out.version}, {"draws", out.draws}, {"outcomes", outcomes}});
                                                            }));

            server.Post(R"(/sessions/([^/]+)/close-sprint)", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                                    {
                                                                        const auto id = req.matches[1].str();
                                                                        service.authorize(id, token_of(req), Access::Facilitator);
                                                                        send_json(res, 200, {{"version", service.close_sprint(id)}});
                                                                    }));

            server.Post(R"(/sessions/([^/]+)/notes)", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                             {
                                                                 const auto id = req.matches[1].str();
                                                                 service.authorize(id, token_of(req), Access::Facilitator);
                                                                 const auto body = body_object(req);
                                                                 service.note(id, body.at("text").get<std::string>());
                                                                 send_json(res, 200, {{"version", service.version(id)}});
                                                             }));

            server.Get(R"(/sessions/([^/]+)/metrics)", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                              {
                                                                  const auto id = req.matches[1].str();
                                                                  service.authorize(id, token_of(req), Access::Read);
                                                                  send_json(res, 200, service.metrics(id));
                                                              }));

            server.Get(R"(/sessions/([^/]+)/export)", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                             {
                                                                 const auto id = req.matches[1].str();
                                                                 service.authorize(id, token_of(req), Access::Read);
                                                                 const auto format = req.has_param("format") ? req.get_param_value("format") : "jsonl";
                                                                 const auto body = service.export_session(id, format);
                                                                 res.set_content(body, format == "jsonl" ? "application/x-ndjson" : "text/csv");
                                                             }));

            server.Get(R"(/sessions/([^/]+)/stream)", guarded([this](const httplib::Request &req, httplib::Response &res)
                                                             {
                                                                 const auto id = req.matches[1].str();
                                                                 service.authorize(id, token_of(req), Access::Read);
                                                                 auto seen = std::make_shared<std::int64_t>(-1);
                                                                 res.set_header("Cache-Control", "no-cache");
                                                                 res.set_chunked_content_provider(
                                                                     "text/event-stream",
                                                                     [this, id, seen](std::size_t, httplib::DataSink &sink)
                                                                     {
                                                                         if (stopping || !sink.is_writable())
                                                                         {
                                                                             sink.done();
                                                                             return false;
                                                                         }
                                                                         const auto v = service.wait_for_change(id, *seen, std::chrono::milliseconds(250));
                                                                         std::string chunk;
                                                                         if (v > *seen)
                                                                         {
                                                                             *seen = v;
                                                                             chunk = "data: " + json{{"session_id", id}, {"version", v}}.dump() + "\n\n";
                                                                         }
                                                                         else
                                                                         {
                                                                             chunk = ": keepalive\n\n";
                                                                         }
                                                                         return sink.write(chunk.data(), chunk.size());
                                                                     });
                                                             }));
        }
    };

    HttpServer::HttpServer(SessionService &service) : m_impl(std::make_unique<Impl>(service)) { m_impl->routes(); }

    HttpServer::~HttpServer() { stop(); }

    int HttpServer::bind(const std::string &host, int port)
    {
        const int bound = port == 0 ? m_impl->server.bind_to_any_port(host) : (m_impl->server.bind_to_port(host, port) ? port : -1);
        if (bound < 0)
        {
            throw SimError(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
        }
        return bound;
    }

    void HttpServer::run() { m_impl->server.listen_after_bind(); }

    void HttpServer::start()
    {
        m_impl->thread = std::thread([this] { m_impl->server.listen_after_bind(); });
        m_impl->server.wait_until_ready();
    }

    void HttpServer::stop()
    {
        m_impl->stopping = true;
        m_impl->server.stop();
        if (m_impl->thread.joinable())
        {
            m_impl->thread.join();
        }
    }
}
