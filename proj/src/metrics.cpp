#include "sprintsim/metrics.hpp"
#include "sprintsim/error.hpp"

#include <algorithm>

namespace sprintsim
{
    IdealLine ideal_line(Ticks scope, int day_count, int team_size, const IdealLinePolicy &policy)
    {
        if (day_count < 1)
        {
            throw SimError(ErrorCode::Usage, "ideal line needs at least one day");
        }
        Ticks origin = scope;
        if (policy.include_ceremony_hours)
        {
            origin += policy.ceremony_per_member_day * (static_cast<std::int64_t>(team_size) * day_count);
        }
        IdealLine line;
        line.origin = origin.hours();
        for (int d = 0; d <= day_count; ++d)
        {
            line.series.push_back({d, line.origin * static_cast<double>(day_count - d) / day_count});
        }
        return line;
    }

    Series sprint_burndown(const TeamState &team, int sprint)
    {
        Series s;
        if (sprint >= 1 && static_cast<std::size_t>(sprint) <= team.burndown_origin.size())
        {
            s.push_back({0, team.burndown_origin[static_cast<std::size_t>(sprint - 1)].hours()});
            for (const auto &p : team.burndown_actual)
            {
                if (p.sprint == sprint)
                {
                    s.push_back({p.sprint_day, p.remaining.hours()});
                }
            }
            return s;
        }
        s.push_back({0, committed_remaining(team).hours()});
        return s;
    }

    Series sprint_burndown(const SessionState &session, const TeamId &team)
    {
        return sprint_burndown(session.teams.at(team), session.calendar.sprint_index);
    }

    Series release_burndown(const TeamState &team, const IdealLinePolicy &policy)
    {
        Series s;
        for (const auto &p : team.release_history)
        {
            const int points = p.user_points + (policy.include_technical_stories ? p.technical_points : 0);
            s.push_back({p.boundary, static_cast<double>(points)});
        }
        return s;
    }

    std::int64_t value_delivered(const TeamState &team, const PolicyConstants &constants)
    {
        std::int64_t v = 0;
        for (const auto &[id, s] : team.stories)
        {
            if (s.kind == StoryKind::User && s.status == StoryStatus::Done)
            {
                v += static_cast<std::int64_t>(constants.moscow.weight(s.priority)) * s.points;
            }
        }
        return v;
    }

    double labor_cost(const TeamState &team, const PolicyConstants &constants)
    {
        return team.charged_regular.hours() + constants.overtime_cost_weight * team.charged_overtime.hours();
    }

    double completed_estimate_hours(const TeamState &team)
    {
        Ticks sum;
        for (const auto &[id, t] : team.tasks)
        {
            if (t.status == TaskStatus::Done)
            {
                sum += t.estimate;
            }
        }
        return sum.hours();
    }

    std::optional<double> efficiency(const TeamState &team, const PolicyConstants &constants)
    {
        const double cost = labor_cost(team, constants);
        if (cost <= 0.0)
        {
            return std::nullopt;
        }
        return completed_estimate_hours(team) / cost;
    }

    std::optional<double> effectiveness(const TeamState &team, const PolicyConstants &constants)
    {
        if (team.committed_value <= 0)
        {
            return std::nullopt;
        }
        return static_cast<double>(value_delivered(team, constants)) / static_cast<double>(team.committed_value);
    }

    std::vector<LeaderboardRow> leaderboard(const SessionState &session)
    {
        const auto &pc = session.config.policy;
        std::vector<LeaderboardRow> rows;
        for (const auto &[id, team] : session.teams)
        {
            LeaderboardRow r;
            r.team = id;
            r.value = value_delivered(team, pc);
            r.cost = labor_cost(team, pc);
            r.efficiency = efficiency(team, pc);
            r.effectiveness = effectiveness(team, pc);
            r.exceeds_commitment = r.value > team.committed_value;
            rows.push_back(std::move(r));
        }
        std::sort(rows.begin(), rows.end(), [](const LeaderboardRow &a, const LeaderboardRow &b)
                  {
                      if (a.value != b.value)
                      {
                          return a.value > b.value;
                      }
                      if (a.cost != b.cost)
                      {
                          return a.cost < b.cost;
                      }
                      return a.team < b.team;
                  });
        return rows;
    }
}
