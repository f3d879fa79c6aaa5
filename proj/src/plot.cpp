#include "sprintsim/plot.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace sprintsim
{
    namespace
    {
        std::string num(double v)
        {
            std::ostringstream os;
            os << std::setprecision(10) << v;
            return os.str();
        }

        const TeamState &team_of(const SessionState &session, const std::optional<TeamId> &team)
        {
            if (!team)
            {
                return session.teams.begin()->second;
            }
            const auto it = session.teams.find(*team);
            if (it == session.teams.end())
            {
                throw SimError(ErrorCode::NotFound, "unknown team '" + *team + "'");
            }
            return it->second;
        }
    }

    std::string session_plot_data(const SessionState &session, std::string_view what, const std::optional<TeamId> &team)
    {
        std::ostringstream os;
        if (what == "burndown")
        {
            os << "day,remaining_hours\n";
            for (const auto &p : sprint_burndown(team_of(session, team), session.calendar.sprint_index))
            {
                os << p.x << ',' << num(p.y) << '\n';
            }
            return os.str();
        }
        if (what == "ideal")
        {
            const auto actual = sprint_burndown(team_of(session, team), session.calendar.sprint_index);
            const auto &c = session.config;
            const auto ideal = ideal_line(Ticks{std::llround(actual.front().y * 2)}, c.sprint_length_days, c.team_size, c.ideal_line);
            os << "day,ideal_hours,actual_hours\n";
            for (const auto &p : ideal.series)
            {
                os << p.x << ',' << num(p.y) << ',';
                const auto it = std::find_if(actual.begin(), actual.end(), [&](const SeriesPoint &a) { return a.x == p.x; });
                if (it != actual.end())
                {
                    os << num(it->y);
                }
                os << '\n';
            }
            return os.str();
        }
        if (what == "leaderboard")
        {
            os << "rank,team,value,cost_hours,efficiency,effectiveness\n";
            int rank = 1;
            for (const auto &row : leaderboard(session))
            {
                os << rank++ << ',' << row.team << ',' << row.value << ',' << num(row.cost) << ','
                   << (row.efficiency ? num(*row.efficiency) : "") << ',' << (row.effectiveness ? num(*row.effectiveness) : "")
                   << '\n';
            }
            return os.str();
        }
        throw SimError(ErrorCode::Usage, "unknown plot data '" + std::string(what) + "' (burndown, ideal, leaderboard)");
    }

    std::string batch_plot_data(const OutcomeTable &table, std::string_view what, std::string_view metric, int bins)
    {
        if (what != "histogram")
        {
            throw SimError(ErrorCode::Usage, "unknown batch plot data '" + std::string(what) + "' (histogram)");
        }
        if (bins < 1)
        {
            throw SimError(ErrorCode::Usage, "histogram needs at least one bin");
        }
        std::vector<double> values;
        for (const auto &r : table.rows)
        {
            if (r.error)
            {
                continue;
            }
            std::optional<double> v;
            if (metric == "value")
                v = static_cast<double>(r.value);
            else if (metric == "cost_hours")
                v = r.cost_hours;
            else if (metric == "efficiency")
                v = r.efficiency;
            else if (metric == "effectiveness")
                v = r.effectiveness;
            else if (metric == "idle_hours")
                v = r.idle_hours;
            else
                throw SimError(ErrorCode::Usage, "unknown histogram metric '" + std::string(metric) + "'");
            if (v)
            {
                values.push_back(*v);
            }
        }
        double lo = 0.0;
        double hi = 1.0;
        if (!values.empty())
        {
            const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
            lo = *mn;
            hi = *mx > *mn ? *mx : *mn + 1.0;
        }
        const double width = (hi - lo) / bins;
        std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
        for (double v : values)
        {
            auto k = static_cast<std::size_t>(std::floor((v - lo) / width));
            counts[std::min(k, counts.size() - 1)]++;
        }
        std::ostringstream os;
        os << "bin_low,bin_high,count\n";
        for (int k = 0; k < bins; ++k)
        {
            os << num(lo + k * width) << ',' << num(lo + (k + 1) * width) << ',' << counts[static_cast<std::size_t>(k)] << '\n';
        }
        return os.str();
    }
}
