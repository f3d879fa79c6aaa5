// Command-line front end. Talks to the simulator only through the C API.

#include "sprintsim/sprintsim.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{
    using nlohmann::json;

    struct Failure
    {
        sps_status status;
        std::string message;
    };

    struct Owned
    {
        char *p = nullptr;
        ~Owned() { sps_string_free(p); }
        std::string str() const { return p ? p : ""; }
    };

    void check(sps_status s)
    {
        if (s != SPS_OK)
        {
            throw Failure{s, sps_last_error()};
        }
    }

    std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw Failure{SPS_IO_ERROR, "cannot read " + path};
        }
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }

    void write_out(const std::string &path, const std::string &content)
    {
        if (path.empty() || path == "-")
        {
            std::cout << content;
            return;
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out || !(out << content))
        {
            throw Failure{SPS_IO_ERROR, "cannot write " + path};
        }
    }

    std::string load_config(const std::string &path, std::optional<std::uint64_t> seed)
    {
        std::string text;
        if (path.empty())
        {
            Owned d;
            check(sps_default_config(&d.p));
            text = d.str();
        }
        else
        {
            text = read_file(path);
        }
        if (!seed)
        {
            return text;
        }
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
        {
            throw Failure{SPS_VALIDATION_ERROR, "config is not a JSON object"};
        }
        j["seed"] = *seed;
        return j.dump();
    }

    // "0..12" or "0,2,4,6"
    std::vector<std::int64_t> parse_values(const std::string &text)
    {
        std::vector<std::int64_t> out;
        try
        {
            if (const auto dots = text.find(".."); dots != std::string::npos)
            {
                const auto lo = std::stoll(text.substr(0, dots));
                const auto hi = std::stoll(text.substr(dots + 2));
                for (auto v = lo; v <= hi; ++v)
                {
                    out.push_back(v);
                }
                return out;
            }
            std::stringstream ss(text);
            for (std::string item; std::getline(ss, item, ',');)
            {
                out.push_back(std::stoll(item));
            }
        }
        catch (const std::exception &)
        {
            throw Failure{SPS_USAGE_ERROR, "cannot parse --values '" + text + "' (use 0..12 or 0,2,4)"};
        }
        return out;
    }

    int exit_code(sps_status s)
    {
        switch (s)
        {
        case SPS_OK:
            return 0;
        case SPS_VALIDATION_ERROR:
        case SPS_CONFIGURATION_ERROR:
            return 2;
        case SPS_INTEGRITY_ERROR:
            return 3;
        default:
            return 1;
        }
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Deterministic Scrum sprint simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;

    auto *cmd_new = app.add_subcommand("new", "Create a session (persisted with --data), optionally playing it with a bot");
    std::string data_dir, play_policy, log_path, export_format;
    cmd_new->add_option("--config", config_path, "Session config JSON (default config when omitted)");
    cmd_new->add_option("--seed", seed, "Override the config seed");
    cmd_new->add_option("--data", data_dir, "Persist the session under this directory");
    cmd_new->add_option("--play", play_policy, "Play the whole session with this bot policy");
    cmd_new->add_option("--log", log_path, "Write the session log (JSON lines) here");
    cmd_new->add_option("--export", export_format, "Export format written to --out (csv, burndown-csv, leaderboard-csv, jsonl)");
    cmd_new->add_option("--out", out_path, "Output file for --export");

    auto *cmd_run = app.add_subcommand("run", "Batch of bot-driven runs over consecutive seeds");
    std::string policy = "greedy-value";
    int runs = 100;
    unsigned threads = 0;
    std::string aggregates_path;
    cmd_run->add_option("--config", config_path, "Session config JSON");
    cmd_run->add_option("--policy", policy, "greedy-value, dependency-first, specialist-aware or random; append +overtime");
    cmd_run->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
    cmd_run->add_option("--seed", seed, "Base seed");
    cmd_run->add_option("--out", out_path, "Per-run CSV (stdout when omitted)");
    cmd_run->add_option("--aggregates", aggregates_path, "Aggregate CSV (stderr when omitted)");
    cmd_run->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto *cmd_cal = app.add_subcommand("calibrate-wheel", "Search a progress wheel with the given moments (hours)");
    double mean = 5.4, sd = 2.9, tolerance = 0.05;
    int slots = 20;
    std::string values = "0..12";
    cmd_cal->add_option("--mean", mean, "Target mean (hours)");
    cmd_cal->add_option("--sd", sd, "Target standard deviation (hours)");
    cmd_cal->add_option("--slots", slots, "Number of equal-weight slots");
    cmd_cal->add_option("--values", values, "Allowed slot values in hours, e.g. 0..12 or 0,2,4");
    cmd_cal->add_option("--tolerance", tolerance, "Allowed error on both moments (hours)");

    auto *cmd_replay = app.add_subcommand("replay", "Verify a session log and print the rebuilt state");
    cmd_replay->add_option("--config", config_path, "Session config JSON")->required();
    cmd_replay->add_option("--log", log_path, "Session log (JSON lines)")->required();
    cmd_replay->add_option("--out", out_path, "Write the state JSON here instead of stdout");

    auto *cmd_serve = app.add_subcommand("serve", "HTTP session service");
    int port = 8080;
    std::string host = "127.0.0.1";
    cmd_serve->add_option("--port", port, "Port (0 picks a free one)");
    cmd_serve->add_option("--host", host, "Bind address");
    cmd_serve->add_option("--data", data_dir, "Directory for session logs and snapshots");

    auto *cmd_plot = app.add_subcommand("plot", "CSV plot data: burndown, ideal, leaderboard (one bot session) or histogram (batch)");
    std::string what = "burndown", metric = "value", team;
    int bins = 10;
    cmd_plot->add_option("--what", what, "burndown, ideal, leaderboard or histogram");
    cmd_plot->add_option("--config", config_path, "Session config JSON");
    cmd_plot->add_option("--seed", seed, "Seed (base seed for histogram)");
    cmd_plot->add_option("--policy", policy, "Bot policy");
    cmd_plot->add_option("--runs", runs, "Runs for histogram");
    cmd_plot->add_option("--metric", metric, "Histogram metric");
    cmd_plot->add_option("--bins", bins, "Histogram bins");
    cmd_plot->add_option("--team", team, "Team id for burndown/ideal");
    cmd_plot->add_option("--out", out_path, "Output CSV (stdout when omitted)");

    auto *cmd_default = app.add_subcommand("default-config", "Print the default session config");
    auto *cmd_validate = app.add_subcommand("validate", "Validate a session config");
    cmd_validate->add_option("--config", config_path, "Session config JSON")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try
    {
        if (*cmd_default)
        {
            Owned d;
            check(sps_default_config(&d.p));
            std::cout << d.str() << '\n';
        }
        else if (*cmd_validate)
        {
            Owned report;
            const auto s = sps_validate_config(read_file(config_path).c_str(), &report.p);
            std::cout << report.str() << '\n';
            if (s != SPS_OK && s != SPS_VALIDATION_ERROR)
            {
                check(s);
            }
            return exit_code(s);
        }
        else if (*cmd_new)
        {
            const auto config = load_config(config_path, seed);
            if (!data_dir.empty())
            {
                sps_service *service = nullptr;
                check(sps_service_open(data_dir.c_str(), &service));
                std::unique_ptr<sps_service, decltype(&sps_service_close)> guard(service, sps_service_close);
                Owned created;
                check(sps_service_create_session(service, config.c_str(), &created.p));
                std::cout << created.str() << '\n';
                return 0;
            }
            sps_session *session = nullptr;
            check(sps_session_create(config.c_str(), &session));
            std::unique_ptr<sps_session, decltype(&sps_session_destroy)> guard(session, sps_session_destroy);
            if (!play_policy.empty())
            {
                check(sps_session_autoplay(session, play_policy.c_str()));
            }
            if (!log_path.empty())
            {
                Owned log;
                check(sps_session_export(session, "jsonl", &log.p));
                write_out(log_path, log.str());
            }
            if (!export_format.empty())
            {
                Owned data;
                check(sps_session_export(session, export_format.c_str(), &data.p));
                write_out(out_path, data.str());
            }
            Owned metrics;
            check(sps_session_metrics(session, &metrics.p));
            std::cerr << json::parse(metrics.str())["leaderboard"].dump(2) << '\n';
        }
        else if (*cmd_run)
        {
            const auto config = load_config(config_path, std::nullopt);
            Owned rows, aggs;
            check(sps_run_batch(config.c_str(), policy.c_str(), runs, seed.value_or(1), threads, &rows.p, &aggs.p));
            write_out(out_path, rows.str());
            if (aggregates_path.empty())
            {
                std::cerr << aggs.str();
            }
            else
            {
                write_out(aggregates_path, aggs.str());
            }
        }
        else if (*cmd_cal)
        {
            const auto v = parse_values(values);
            Owned result;
            check(sps_calibrate_wheel(mean, sd, slots, v.data(), v.size(), tolerance, &result.p));
            std::cout << json::parse(result.str()).dump(2) << '\n';
        }
        else if (*cmd_replay)
        {
            Owned state;
            check(sps_replay(read_file(config_path).c_str(), read_file(log_path).c_str(), &state.p));
            write_out(out_path, state.str() + "\n");
        }
        else if (*cmd_serve)
        {
            check(sps_serve(host.c_str(), port, data_dir.empty() ? nullptr : data_dir.c_str()));
        }
        else if (*cmd_plot)
        {
            const auto config = load_config(config_path, what == "histogram" ? std::nullopt : seed);
            Owned data;
            if (what == "histogram")
            {
                check(sps_batch_histogram(config.c_str(), policy.c_str(), runs, seed.value_or(1), metric.c_str(), bins, &data.p));
            }
            else
            {
                sps_session *session = nullptr;
                check(sps_session_create(config.c_str(), &session));
                std::unique_ptr<sps_session, decltype(&sps_session_destroy)> guard(session, sps_session_destroy);
                check(sps_session_autoplay(session, policy.c_str()));
                check(sps_session_plot(session, what.c_str(), team.empty() ? nullptr : team.c_str(), &data.p));
            }
            write_out(out_path, data.str());
        }
    }
    catch (const Failure &f)
    {
        std::cerr << "error: " << sps_status_name(f.status) << ": " << f.message << '\n';
        return exit_code(f.status);
    }
    return 0;
}
