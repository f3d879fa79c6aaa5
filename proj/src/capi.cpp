#include "sprintsim/sprintsim.h"

#include "sprintsim/batch.hpp"
#include "sprintsim/defaults.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/http.hpp"
#include "sprintsim/journal.hpp"
#include "sprintsim/plot.hpp"
#include "sprintsim/serialize.hpp"
#include "sprintsim/service.hpp"

#include <csignal>
#include <cstring>
#include <pthread.h>

using namespace sprintsim;

struct sps_session
{
    LiveSession live;
};

struct sps_service
{
    SessionService service;
};

struct sps_server
{
    explicit sps_server(SessionService &service) : http(service) {}
    HttpServer http;
};

namespace
{
    thread_local std::string last_error;

    sps_status status_of(ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::Validation: return SPS_VALIDATION_ERROR;
        case ErrorCode::Configuration: return SPS_CONFIGURATION_ERROR;
        case ErrorCode::Phase: return SPS_PHASE_ERROR;
        case ErrorCode::SpecialistMismatch: return SPS_SPECIALIST_MISMATCH;
        case ErrorCode::Lifecycle: return SPS_LIFECYCLE_ERROR;
        case ErrorCode::OvertimeCap: return SPS_OVERTIME_CAP;
        case ErrorCode::Dependency: return SPS_DEPENDENCY_ERROR;
        case ErrorCode::Absent: return SPS_ABSENT;
        case ErrorCode::NotFound: return SPS_NOT_FOUND;
        case ErrorCode::Integrity: return SPS_INTEGRITY_ERROR;
        case ErrorCode::Auth: return SPS_AUTH_ERROR;
        case ErrorCode::Format: return SPS_FORMAT_ERROR;
        case ErrorCode::Conflict: return SPS_VERSION_CONFLICT;
        case ErrorCode::NoSolution: return SPS_NO_SOLUTION;
        case ErrorCode::Usage: return SPS_USAGE_ERROR;
        case ErrorCode::Io: return SPS_IO_ERROR;
        case ErrorCode::Internal: return SPS_INTERNAL_ERROR;
        }
        return SPS_INTERNAL_ERROR;
    }

    char *dup(const std::string &s)
    {
        auto *out = static_cast<char *>(std::malloc(s.size() + 1));
        if (!out)
        {
            throw std::bad_alloc();
        }
        std::memcpy(out, s.c_str(), s.size() + 1);
        return out;
    }

    sps_status fail(sps_status status, std::string message)
    {
        last_error = std::move(message);
        return status;
    }

    // Runs `f`, mapping exceptions to status codes and the thread's error text.
    template <typename F>
    sps_status guard(F &&f)
    {
        try
        {
            last_error.clear();
            return f();
        }
        catch (const SimError &e)
        {
            return fail(status_of(e.code()), e.what());
        }
        catch (const json::exception &e)
        {
            return fail(SPS_VALIDATION_ERROR, e.what());
        }
        catch (const std::bad_alloc &)
        {
            return fail(SPS_INTERNAL_ERROR, "out of memory");
        }
        catch (const std::exception &e)
        {
            return fail(SPS_INTERNAL_ERROR, e.what());
        }
        catch (...)
        {
            return fail(SPS_INTERNAL_ERROR, "unknown error");
        }
    }

#define SPS_REQUIRE(cond)                                                                                                   \
    do                                                                                                                     \
    {                                                                                                                      \
        if (!(cond))                                                                                                       \
        {                                                                                                                  \
            return fail(SPS_INVALID_ARGUMENT, "invalid argument: " #cond);                                                 \
        }                                                                                                                  \
    } while (0)

    sps_status put(char **out, const std::string &s)
    {
        *out = dup(s);
        return SPS_OK;
    }
}

extern "C" {

const char *sps_version(void) { return "1.0.0"; }

const char *sps_status_name(sps_status status)
{
    switch (status)
    {
    case SPS_OK: return "OK";
    case SPS_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    default:
        if (status > SPS_OK && status < SPS_INVALID_ARGUMENT)
        {
            return error_code_name(static_cast<ErrorCode>(status - 1)).data();
        }
        return "UNKNOWN";
    }
}

const char *sps_last_error(void) { return last_error.c_str(); }

void sps_string_free(char *s) { std::free(s); }

sps_status sps_default_config(char **out_json)
{
    SPS_REQUIRE(out_json);
    return guard([&] { return put(out_json, json(default_config()).dump(2)); });
}

sps_status sps_validate_config(const char *config_json, char **out_report)
{
    SPS_REQUIRE(config_json && out_report);
    return guard(
        [&]
        {
            const auto config = parse_config(config_json);
            const auto violations = validate_config(config);
            put(out_report, json{{"violations", violations}, {"warnings", config_warnings(config)}}.dump());
            if (!violations.empty())
            {
                return fail(SPS_VALIDATION_ERROR, violations.front().field + ": " + violations.front().rule);
            }
            return SPS_OK;
        });
}

sps_status sps_session_create(const char *config_json, sps_session **out)
{
    SPS_REQUIRE(config_json && out);
    return guard(
        [&]
        {
            *out = new sps_session{LiveSession(parse_config(config_json))};
            return SPS_OK;
        });
}

void sps_session_destroy(sps_session *session) { delete session; }

sps_status sps_session_command(sps_session *session, const char *team_id, const char *command_json,
                               int64_t expected_version, int64_t *out_version)
{
    SPS_REQUIRE(session && team_id && command_json);
    return guard(
        [&]
        {
            std::optional<std::int64_t> expected;
            if (expected_version >= 0)
            {
                expected = expected_version;
            }
            const auto out = session->live.post_command(team_id, parse_command(command_json), expected);
            if (out_version)
            {
                *out_version = out.version;
            }
            return SPS_OK;
        });
}

sps_status sps_session_spin(sps_session *session, int override_gate, int expected_day, char **out_json)
{
    SPS_REQUIRE(session);
    return guard(
        [&]
        {
            std::optional<int> day;
            if (expected_day > 0)
            {
                day = expected_day;
            }
            const auto out = session->live.spin_day(override_gate != 0, day);
            if (out_json)
            {
                json outcomes = json::object();
                for (const auto &[tid, o] : out.outcomes)
                {
                    outcomes[tid] = o;
                }
                put(out_json, json{{"version", out.version}, {"draws", out.draws}, {"outcomes", outcomes}}.dump());
            }
            return SPS_OK;
        });
}

sps_status sps_session_close_sprint(sps_session *session, int64_t *out_version)
{
    SPS_REQUIRE(session);
    return guard(
        [&]
        {
            const auto v = session->live.close_sprint();
            if (out_version)
            {
                *out_version = v;
            }
            return SPS_OK;
        });
}

sps_status sps_session_note(sps_session *session, const char *text)
{
    SPS_REQUIRE(session && text);
    return guard(
        [&]
        {
            session->live.note(text);
            return SPS_OK;
        });
}

sps_status sps_session_version(const sps_session *session, int64_t *out_version)
{
    SPS_REQUIRE(session && out_version);
    *out_version = session->live.version();
    return SPS_OK;
}

sps_status sps_session_state(const sps_session *session, char **out_json)
{
    SPS_REQUIRE(session && out_json);
    return guard([&] { return put(out_json, canonical(session->live.state())); });
}

sps_status sps_session_metrics(const sps_session *session, char **out_json)
{
    SPS_REQUIRE(session && out_json);
    return guard([&] { return put(out_json, metrics_json(session->live.state()).dump()); });
}

sps_status sps_session_export(const sps_session *session, const char *format, char **out)
{
    SPS_REQUIRE(session && format && out);
    return guard([&] { return put(out, export_session(session->live, format)); });
}

sps_status sps_session_plot(const sps_session *session, const char *what, const char *team_id, char **out_csv)
{
    SPS_REQUIRE(session && what && out_csv);
    return guard(
        [&]
        {
            std::optional<TeamId> team;
            if (team_id)
            {
                team = team_id;
            }
            return put(out_csv, session_plot_data(session->live.state(), what, team));
        });
}

sps_status sps_session_autoplay(sps_session *session, const char *policy)
{
    SPS_REQUIRE(session && policy);
    return guard(
        [&]
        {
            play_with_bots(session->live, parse_policy(policy));
            return SPS_OK;
        });
}

sps_status sps_replay(const char *config_json, const char *log_jsonl, char **out_state_json)
{
    SPS_REQUIRE(config_json && log_jsonl && out_state_json);
    return guard(
        [&]
        {
            const auto config = parse_config(config_json);
            const auto records = parse_jsonl(log_jsonl);
            return put(out_state_json, canonical(replay_log(config, records)));
        });
}

sps_status sps_calibrate_wheel(double mean_hours, double sd_hours, int slots, const int64_t *values, size_t value_count,
                               double tolerance_hours, char **out_json)
{
    SPS_REQUIRE(out_json && (values || value_count == 0));
    return guard(
        [&]
        {
            CalibrationRequest req;
            req.target_mean = mean_hours;
            req.target_sd = sd_hours;
            req.slot_count = slots;
            req.tolerance = tolerance_hours;
            req.values.assign(values, values + value_count);
            const auto result = calibrate_wheel(req);
            WheelConfig ticks;
            json hours = json::array();
            for (const auto &s : result.config.slots)
            {
                ticks.slots.push_back({Ticks::from_hours(s.value).count(), s.weight});
                hours.push_back(s.value);
            }
            return put(out_json, json{{"progress_wheel", ticks},
                                      {"mean_hours", result.stats.mean},
                                      {"sd_hours", result.stats.sd},
                                      {"values_hours", hours}}
                                     .dump());
        });
}

sps_status sps_run_batch(const char *config_json, const char *policy, int runs, uint64_t base_seed, unsigned threads,
                         char **out_rows_csv, char **out_aggregates_csv)
{
    SPS_REQUIRE(config_json && policy && out_rows_csv);
    return guard(
        [&]
        {
            const auto table = run_batch(parse_config(config_json), parse_policy(policy), runs, base_seed, threads);
            put(out_rows_csv, outcome_csv(table));
            if (out_aggregates_csv)
            {
                put(out_aggregates_csv, aggregate_csv(table));
            }
            return SPS_OK;
        });
}

sps_status sps_batch_histogram(const char *config_json, const char *policy, int runs, uint64_t base_seed,
                               const char *metric, int bins, char **out_csv)
{
    SPS_REQUIRE(config_json && policy && metric && out_csv);
    return guard(
        [&]
        {
            const auto table = run_batch(parse_config(config_json), parse_policy(policy), runs, base_seed);
            return put(out_csv, batch_plot_data(table, "histogram", metric, bins));
        });
}

sps_status sps_service_open(const char *data_dir, sps_service **out)
{
    SPS_REQUIRE(out);
    return guard(
        [&]
        {
            ServiceOptions options;
            if (data_dir)
            {
                options.data_dir = data_dir;
            }
            *out = new sps_service{SessionService(std::move(options))};
            return SPS_OK;
        });
}

void sps_service_close(sps_service *service) { delete service; }

sps_status sps_service_create_session(sps_service *service, const char *config_json, char **out_json)
{
    SPS_REQUIRE(service && config_json && out_json);
    return guard(
        [&]
        {
            const auto created = service->service.create(parse_config(config_json));
            return put(out_json, json{{"id", created.id},
                                      {"facilitator_token", created.facilitator_token},
                                      {"team_token", created.team_token},
                                      {"warnings", created.warnings},
                                      {"version", service->service.version(created.id)}}
                                     .dump());
        });
}

sps_status sps_service_sessions(const sps_service *service, char **out_json)
{
    SPS_REQUIRE(service && out_json);
    return guard([&] { return put(out_json, json(service->service.session_ids()).dump()); });
}

sps_status sps_server_start(sps_service *service, const char *host, int port, sps_server **out, int *out_port)
{
    SPS_REQUIRE(service && host && out && port >= 0);
    return guard(
        [&]
        {
            auto server = std::make_unique<sps_server>(service->service);
            const int bound = server->http.bind(host, port);
            server->http.start();
            if (out_port)
            {
                *out_port = bound;
            }
            *out = server.release();
            return SPS_OK;
        });
}

void sps_server_stop(sps_server *server)
{
    if (server)
    {
        server->http.stop();
        delete server;
    }
}

sps_status sps_serve(const char *host, int port, const char *data_dir)
{
    SPS_REQUIRE(host && port >= 0);
    return guard(
        [&]
        {
            // Worker threads inherit the mask, so the signal is only seen by sigwait below.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            ServiceOptions options;
            if (data_dir)
            {
                options.data_dir = data_dir;
            }
            SessionService service(std::move(options));
            HttpServer http(service);
            const int bound = http.bind(host, port);
            http.start();
            std::fprintf(stderr, "serving on http://%s:%d\n", host, bound);
            int sig = 0;
            sigwait(&signals, &sig);
            http.stop();
            return SPS_OK;
        });
}

}
