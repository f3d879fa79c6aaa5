#pragma once

// Headless Monte Carlo runs: one bot-driven team per seed.

#include "sprintsim/bots.hpp"
#include "sprintsim/engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sprintsim
{
    struct RunRow
    {
        std::uint64_t seed = 0;
        // Set when the run could not be set up; the other fields are then zero.
        std::optional<std::string> error;
        std::int64_t value = 0;
        double cost_hours = 0.0;
        std::optional<double> efficiency;
        std::optional<double> effectiveness;
        // Every story the bot committed during planning was accepted.
        bool completed = false;
        double completed_hours = 0.0;
        double idle_hours = 0.0;
        double drawn_hours = 0.0;
        std::int64_t member_days = 0;
        double overtime_hours = 0.0;
    };

    struct Aggregate
    {
        std::string metric;
        std::size_t count = 0;
        double mean = 0.0;
        double sd = 0.0;
        double min = 0.0;
        double p10 = 0.0;
        double p50 = 0.0;
        double p90 = 0.0;
        double max = 0.0;
    };

    struct OutcomeTable
    {
        std::string policy;
        std::vector<RunRow> rows;
        std::vector<Aggregate> aggregates;
        double completion_fraction = 0.0;
        std::size_t errors = 0;
    };

    struct BotRun
    {
        SessionState state;
        // Union of the stories committed at sprint planning.
        std::vector<StoryId> planned;
    };

    // Plays every sprint of a session with the same bot for each team.
    BotRun run_bot_session(SessionConfig config, const BotPolicy &policy);

    // Row for the first team of a finished run.
    RunRow summarize_run(const BotRun &run);

    // Seeds base_seed .. base_seed + runs - 1, parallel across seeds, rows in
    // seed order. threads = 0 uses the hardware concurrency.
    OutcomeTable run_batch(const SessionConfig &config, const BotPolicy &policy, int runs, std::uint64_t base_seed,
                           unsigned threads = 0);

    // Linear-interpolation quantile of sorted data, q in [0, 1].
    double quantile(const std::vector<double> &sorted, double q);
    Aggregate aggregate(std::string metric, std::vector<double> values);

    std::string outcome_csv(const OutcomeTable &table);
    std::string aggregate_csv(const OutcomeTable &table);
}
