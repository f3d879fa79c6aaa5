#pragma once

#include "sprintsim/engine.hpp"
#include "sprintsim/model.hpp"

#include <optional>
#include <vector>

namespace sprintsim
{
    struct SeriesPoint
    {
        int x = 0;
        // Hours for burndowns and ideal lines, story points for release charts.
        double y = 0.0;

        bool operator==(const SeriesPoint &) const = default;
    };

    using Series = std::vector<SeriesPoint>;

    struct IdealLine
    {
        Series series;
        double origin = 0.0;
    };

    // Straight line from the adjusted scope at day 0 to zero at day_count.
    // With include_ceremony_hours the ceremony time the team spends instead
    // of task work is added to the ordinate at the origin.
    IdealLine ideal_line(Ticks scope, int day_count, int team_size, const IdealLinePolicy &policy);

    // Remaining committed hours by sprint day, starting with the day-0 scope.
    Series sprint_burndown(const TeamState &team, int sprint);

    // Current sprint of a session (the latest started or being planned).
    Series sprint_burndown(const SessionState &session, const TeamId &team);

    // Remaining story points at each sprint boundary.
    Series release_burndown(const TeamState &team, const IdealLinePolicy &policy);

    std::int64_t value_delivered(const TeamState &team, const PolicyConstants &constants);

    // Regular hours plus overtime hours scaled by the overtime pay weight.
    double labor_cost(const TeamState &team, const PolicyConstants &constants);

    // Estimates of completed tasks, in hours.
    double completed_estimate_hours(const TeamState &team);

    std::optional<double> efficiency(const TeamState &team, const PolicyConstants &constants);
    std::optional<double> effectiveness(const TeamState &team, const PolicyConstants &constants);

    struct LeaderboardRow
    {
        TeamId team;
        std::int64_t value = 0;
        double cost = 0.0;
        std::optional<double> efficiency;
        std::optional<double> effectiveness;
        // Delivered value above the planning commitment (event stories).
        bool exceeds_commitment = false;
    };

    // Most value first, then cheapest, then team id.
    std::vector<LeaderboardRow> leaderboard(const SessionState &session);
}
