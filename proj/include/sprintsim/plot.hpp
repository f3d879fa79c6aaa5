#pragma once

// CSV tables for external plotting tools.

#include "sprintsim/batch.hpp"
#include "sprintsim/engine.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace sprintsim
{
    // what: burndown (day,remaining_hours), ideal (day,ideal_hours,actual_hours)
    // or leaderboard. Burndown and ideal cover one team, the first by default.
    std::string session_plot_data(const SessionState &session, std::string_view what,
                                  const std::optional<TeamId> &team = std::nullopt);

    // what: histogram of `metric` (value, cost_hours, efficiency,
    // effectiveness, idle_hours) with `bins` equal-width bins.
    std::string batch_plot_data(const OutcomeTable &table, std::string_view what, std::string_view metric = "value",
                                int bins = 10);
}
