#include "sprintsim/batch.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace sprintsim
{
    BotRun run_bot_session(SessionConfig config, const BotPolicy &policy)
    {
        BotRun run;
        run.state = init_session(config);
        std::map<TeamId, RngState> rngs;
        int t = 0;
        for (const auto &[id, team] : run.state.teams)
        {
            rngs[id] = bot_rng(config.seed).advanced(static_cast<std::uint64_t>(t++) << 32);
        }
        std::set<StoryId> planned;
        auto &s = run.state;
        while (s.phase != Phase::Finished)
        {
            if (s.phase == Phase::SprintClosed)
            {
                s = close_sprint(std::move(s));
                continue;
            }
            for (auto &[id, rng] : rngs)
            {
                if (s.phase == Phase::Planning)
                {
                    auto plan = plan_commands(s.teams.at(id), s.config, policy, rng);
                    rng = plan.rng;
                    for (const auto &cmd : plan.commands)
                    {
                        if (id == s.teams.begin()->first)
                        {
                            const auto &stories = std::get<PlanCommit>(cmd).stories;
                            planned.insert(stories.begin(), stories.end());
                        }
                        s = submit(std::move(s), id, cmd);
                    }
                }
                auto daily = day_commands(s.teams.at(id), s.config, s.calendar, policy, rng);
                rng = daily.rng;
                for (const auto &cmd : daily.commands)
                {
                    s = submit(std::move(s), id, cmd);
                }
            }
            s = advance_day(std::move(s)).state;
        }
        run.planned.assign(planned.begin(), planned.end());
        return run;
    }

    RunRow summarize_run(const BotRun &run)
    {
        const auto &state = run.state;
        const auto &team = state.teams.begin()->second;
        const auto &pc = state.config.policy;
        RunRow row;
        row.seed = state.config.seed;
        row.value = value_delivered(team, pc);
        row.cost_hours = labor_cost(team, pc);
        row.efficiency = efficiency(team, pc);
        row.effectiveness = effectiveness(team, pc);
        row.completed = !run.planned.empty() &&
                        std::all_of(run.planned.begin(), run.planned.end(),
                                    [&](const StoryId &id) { return team.stories.at(id).status == StoryStatus::Done; });
        row.completed_hours = completed_estimate_hours(team);
        row.idle_hours = team.idle_total.hours();
        row.drawn_hours = team.drawn_total.hours();
        row.member_days = static_cast<std::int64_t>(state.config.team_size) * state.config.sprint_length_days *
                          state.config.sprint_count;
        row.overtime_hours = team.charged_overtime.hours();
        return row;
    }

    double quantile(const std::vector<double> &sorted, double q)
    {
        if (sorted.empty())
        {
            return 0.0;
        }
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    }

    Aggregate aggregate(std::string metric, std::vector<double> values)
    {
        Aggregate a;
        a.metric = std::move(metric);
        a.count = values.size();
        if (values.empty())
        {
            return a;
        }
        std::sort(values.begin(), values.end());
        double sum = 0.0;
        for (double v : values)
        {
            sum += v;
        }
        a.mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values)
        {
            ss += (v - a.mean) * (v - a.mean);
        }
        a.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        a.min = values.front();
        a.max = values.back();
        a.p10 = quantile(values, 0.10);
        a.p50 = quantile(values, 0.50);
        a.p90 = quantile(values, 0.90);
        return a;
    }

    OutcomeTable run_batch(const SessionConfig &config, const BotPolicy &policy, int runs, std::uint64_t base_seed,
                           unsigned threads)
    {
        if (runs < 1)
        {
            throw SimError(ErrorCode::Usage, "runs must be at least 1");
        }
        OutcomeTable table;
        table.policy = policy_name(policy);
        table.rows.resize(static_cast<std::size_t>(runs));

        std::atomic<int> next{0};
        auto worker = [&]
        {
            for (int i = next++; i < runs; i = next++)
            {
                auto &row = table.rows[static_cast<std::size_t>(i)];
                SessionConfig c = config;
                c.team_count = 1;
                c.seed = base_seed + static_cast<std::uint64_t>(i);
                try
                {
                    row = summarize_run(run_bot_session(std::move(c), policy));
                }
                catch (const std::exception &e)
                {
                    row = RunRow{};
                    row.seed = base_seed + static_cast<std::uint64_t>(i);
                    row.error = e.what();
                }
            }
        };
        if (threads == 0)
        {
            threads = std::max(1u, std::thread::hardware_concurrency());
        }
        threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));
        std::vector<std::jthread> pool;
        for (unsigned k = 1; k < threads; ++k)
        {
            pool.emplace_back(worker);
        }
        worker();
        pool.clear();

        std::vector<double> value, cost, eff, effect, completed, idle, drawn;
        std::size_t done = 0;
        for (const auto &r : table.rows)
        {
            if (r.error)
            {
                ++table.errors;
                continue;
            }
            value.push_back(static_cast<double>(r.value));
            cost.push_back(r.cost_hours);
            if (r.efficiency)
            {
                eff.push_back(*r.efficiency);
            }
            if (r.effectiveness)
            {
                effect.push_back(*r.effectiveness);
            }
            completed.push_back(r.completed ? 1.0 : 0.0);
            idle.push_back(r.idle_hours);
            drawn.push_back(r.member_days > 0 ? r.drawn_hours / static_cast<double>(r.member_days) : 0.0);
            done += r.completed ? 1 : 0;
        }
        const auto ok = table.rows.size() - table.errors;
        table.completion_fraction = ok ? static_cast<double>(done) / static_cast<double>(ok) : 0.0;
        table.aggregates.push_back(aggregate("value", std::move(value)));
        table.aggregates.push_back(aggregate("cost_hours", std::move(cost)));
        table.aggregates.push_back(aggregate("efficiency", std::move(eff)));
        table.aggregates.push_back(aggregate("effectiveness", std::move(effect)));
        table.aggregates.push_back(aggregate("completed", std::move(completed)));
        table.aggregates.push_back(aggregate("idle_hours", std::move(idle)));
        table.aggregates.push_back(aggregate("drawn_hours_per_member_day", std::move(drawn)));
        return table;
    }

    namespace
    {
        std::string num(double v)
        {
            std::ostringstream os;
            os << std::setprecision(10) << v;
            return os.str();
        }

        std::string opt(const std::optional<double> &v) { return v ? num(*v) : ""; }

        std::string quoted(const std::string &s)
        {
            std::string out = "\"";
            for (char c : s)
            {
                out += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            return out + '"';
        }
    }

    std::string outcome_csv(const OutcomeTable &table)
    {
        std::ostringstream os;
        os << "seed,policy,value,cost_hours,efficiency,effectiveness,completed,completed_hours,idle_hours,drawn_hours,"
              "overtime_hours,error\n";
        for (const auto &r : table.rows)
        {
            os << r.seed << ',' << table.policy << ',';
            if (r.error)
            {
                os << ",,,,,,,,," << quoted(*r.error) << '\n';
                continue;
            }
            os << r.value << ',' << num(r.cost_hours) << ',' << opt(r.efficiency) << ',' << opt(r.effectiveness) << ','
               << (r.completed ? 1 : 0) << ',' << num(r.completed_hours) << ',' << num(r.idle_hours) << ','
               << num(r.drawn_hours) << ',' << num(r.overtime_hours) << ",\n";
        }
        return os.str();
    }

    std::string aggregate_csv(const OutcomeTable &table)
    {
        std::ostringstream os;
        os << "metric,count,mean,sd,min,p10,p50,p90,max\n";
        for (const auto &a : table.aggregates)
        {
            os << a.metric << ',' << a.count << ',' << num(a.mean) << ',' << num(a.sd) << ',' << num(a.min) << ','
               << num(a.p10) << ',' << num(a.p50) << ',' << num(a.p90) << ',' << num(a.max) << '\n';
        }
        return os.str();
    }
}
