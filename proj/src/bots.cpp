#include "sprintsim/bots.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace sprintsim
{
    namespace
    {
        constexpr std::uint64_t bot_stream_salt = 0xB07B07B07B07B07BULL;

        const std::map<std::string_view, BotKind> kinds = {
            {"greedy-value", BotKind::GreedyValue},
            {"dependency-first", BotKind::DependencyFirst},
            {"specialist-aware", BotKind::SpecialistAware},
            {"random", BotKind::Random},
        };

        std::int64_t value_of(const Story &s, const SessionConfig &config)
        {
            return static_cast<std::int64_t>(config.policy.moscow.weight(s.priority)) * s.points;
        }

        Ticks open_hours(const TeamState &team, const Story &s)
        {
            Ticks sum;
            for (const auto &t : s.tasks)
            {
                sum += team.tasks.at(t).remaining;
            }
            return sum;
        }

        // Position of each story in dependency order.
        std::map<StoryId, std::size_t> topo_rank(const TeamState &team)
        {
            std::map<StoryId, std::size_t> rank;
            if (const auto order = topological_order(team.stories))
            {
                for (std::size_t i = 0; i < order->size(); ++i)
                {
                    rank[(*order)[i]] = i;
                }
            }
            return rank;
        }

        void shuffle(std::vector<const Story *> &v, RngState &rng)
        {
            for (std::size_t i = v.size(); i > 1; --i)
            {
                const auto j = reduce(next_u64(rng), i);
                std::swap(v[i - 1], v[j]);
            }
        }

        // Stories in the order a policy prefers to work on them.
        std::vector<const Story *> preference(const TeamState &team, const SessionConfig &config, const BotPolicy &policy,
                                              std::vector<const Story *> stories, RngState &rng, bool density)
        {
            const auto rank = topo_rank(team);
            auto by_order = [](const Story *a, const Story *b) { return std::tie(a->order, a->id) < std::tie(b->order, b->id); };
            std::sort(stories.begin(), stories.end(), by_order);
            switch (policy.kind)
            {
            case BotKind::DependencyFirst:
                std::stable_sort(stories.begin(), stories.end(),
                                 [&](const Story *a, const Story *b) { return rank.at(a->id) < rank.at(b->id); });
                break;
            case BotKind::Random:
                shuffle(stories, rng);
                break;
            case BotKind::GreedyValue:
            case BotKind::SpecialistAware:
                if (density)
                {
                    // value / hours compared by cross-multiplication.
                    std::stable_sort(stories.begin(), stories.end(),
                                     [&](const Story *a, const Story *b)
                                     {
                                         const auto ha = std::max<std::int64_t>(1, open_hours(team, *a).count());
                                         const auto hb = std::max<std::int64_t>(1, open_hours(team, *b).count());
                                         return value_of(*a, config) * hb > value_of(*b, config) * ha;
                                     });
                }
                else
                {
                    std::stable_sort(stories.begin(), stories.end(),
                                     [&](const Story *a, const Story *b) { return value_of(*a, config) > value_of(*b, config); });
                }
                break;
            }
            return stories;
        }

        bool unblocked(const TeamState &team, const Story &s)
        {
            return std::all_of(s.depends_on.begin(), s.depends_on.end(),
                               [&](const StoryId &d)
                               {
                                   const auto it = team.stories.find(d);
                                   if (it == team.stories.end() || it->second.status == StoryStatus::Done)
                                   {
                                       return true;
                                   }
                                   return std::all_of(it->second.tasks.begin(), it->second.tasks.end(),
                                                      [&](const TaskId &t) { return team.tasks.at(t).status == TaskStatus::Done; });
                               });
        }

        // Hours of `s` restricted to each role.
        std::map<RoleName, Ticks> role_hours(const TeamState &team, const Story &s)
        {
            std::map<RoleName, Ticks> out;
            for (const auto &tid : s.tasks)
            {
                const auto &t = team.tasks.at(tid);
                if (t.required_role)
                {
                    out[*t.required_role] += t.remaining;
                }
            }
            return out;
        }

        Ticks ideal_remaining(const TeamState &team, const SessionConfig &config, const Calendar &calendar)
        {
            const auto s = static_cast<std::size_t>(calendar.sprint_index);
            const Ticks scope = team.burndown_origin.size() >= s ? team.burndown_origin[s - 1] : committed_remaining(team);
            const auto line = ideal_line(scope, config.sprint_length_days, config.team_size, config.ideal_line);
            const double hours = line.series.at(static_cast<std::size_t>(calendar.sprint_day - 1)).y;
            return Ticks{static_cast<std::int64_t>(hours * 2.0)};
        }
    }

    BotPolicy parse_policy(std::string_view text)
    {
        BotPolicy p;
        constexpr std::string_view suffix = "+overtime";
        if (text.ends_with(suffix))
        {
            p.overtime = OvertimeRule::WhenBehindIdeal;
            text.remove_suffix(suffix.size());
        }
        const auto it = kinds.find(text);
        if (it == kinds.end())
        {
            throw SimError(ErrorCode::Usage, "unknown policy '" + std::string(text) +
                                                 "' (greedy-value, dependency-first, specialist-aware, random; append +overtime)");
        }
        p.kind = it->second;
        return p;
    }

    std::string policy_name(const BotPolicy &policy)
    {
        for (const auto &[name, kind] : kinds)
        {
            if (kind == policy.kind)
            {
                return std::string(name) + (policy.overtime == OvertimeRule::WhenBehindIdeal ? "+overtime" : "");
            }
        }
        return "unknown";
    }

    RngState bot_rng(std::uint64_t session_seed) { return RngState{session_seed ^ bot_stream_salt, 0}; }

    Ticks max_daily_progress(const SessionConfig &config, Ticks overtime)
    {
        std::int64_t top = 0;
        for (const auto &s : config.progress_wheel.slots)
        {
            top = std::max(top, s.value);
        }
        return effective_progress(Ticks{top}, overtime, config.nominal_per_day, config.policy.overtime_productivity);
    }

    BotDecision plan_commands(const TeamState &team, const SessionConfig &config, const BotPolicy &policy, RngState rng)
    {
        std::vector<const Story *> candidates;
        for (const auto &[id, s] : team.stories)
        {
            if (s.status == StoryStatus::Backlog && s.origin == Origin::Planned && !s.tasks.empty())
            {
                candidates.push_back(&s);
            }
        }
        const auto ordered = preference(team, config, policy, std::move(candidates), rng, true);

        const Ticks capacity = sprint_capacity(config) - committed_remaining(team);
        std::map<RoleName, Ticks> role_capacity;
        for (const auto &m : team.members)
        {
            if (m.role != generalist_role)
            {
                role_capacity[m.role] += config.nominal_per_day * config.sprint_length_days;
            }
        }

        std::set<StoryId> chosen;
        std::vector<StoryId> picks;
        Ticks planned;
        std::map<RoleName, Ticks> role_planned;
        auto deps_ok = [&](const Story &s)
        {
            return std::all_of(s.depends_on.begin(), s.depends_on.end(),
                               [&](const StoryId &d) { return team.stories.at(d).status != StoryStatus::Backlog || chosen.contains(d); });
        };
        // Repeated passes let a story follow the dependencies it was waiting on.
        for (bool progress = true; progress;)
        {
            progress = false;
            for (const Story *s : ordered)
            {
                if (chosen.contains(s->id) || !deps_ok(*s))
                {
                    continue;
                }
                const Ticks hours = open_hours(team, *s);
                if (planned + hours > capacity)
                {
                    continue;
                }
                if (policy.kind == BotKind::SpecialistAware)
                {
                    const auto need = role_hours(team, *s);
                    const bool fits = std::all_of(need.begin(), need.end(),
                                                  [&](const auto &kv) { return role_planned[kv.first] + kv.second <= role_capacity[kv.first]; });
                    if (!fits)
                    {
                        continue;
                    }
                    for (const auto &[role, h] : need)
                    {
                        role_planned[role] += h;
                    }
                }
                chosen.insert(s->id);
                picks.push_back(s->id);
                planned += hours;
                progress = true;
            }
        }
        BotDecision out;
        out.commands.push_back(PlanCommit{picks});
        out.rng = rng;
        return out;
    }

    BotDecision day_commands(const TeamState &team, const SessionConfig &config, const Calendar &calendar,
                             const BotPolicy &policy, RngState rng)
    {
        BotDecision out;
        const int day = calendar.absolute_day;

        std::map<TaskId, MemberIndex> holder;
        std::map<MemberIndex, std::vector<TaskId>> queues = team.assignments;
        for (const auto &[m, q] : queues)
        {
            for (const auto &t : q)
            {
                holder[t] = m;
            }
        }

        // Work parked with absent members goes back to the pool.
        if (policy.kind != BotKind::Random)
        {
            for (const auto &m : team.members)
            {
                if (!m.absent_on(day))
                {
                    continue;
                }
                for (const auto &t : queues[m.index])
                {
                    out.commands.push_back(UnassignTask{m.index, t});
                    holder.erase(t);
                }
                queues[m.index].clear();
            }
        }

        Ticks overtime;
        if (policy.overtime == OvertimeRule::WhenBehindIdeal)
        {
            const Ticks behind = committed_remaining(team) - ideal_remaining(team, config, calendar);
            if (behind > config.nominal_per_day * config.team_size)
            {
                overtime = config.policy.max_overtime_per_day;
            }
        }

        std::vector<const Story *> committed;
        for (const auto &[id, s] : team.stories)
        {
            if (s.status == StoryStatus::Committed && unblocked(team, s))
            {
                committed.push_back(&s);
            }
        }
        const auto ordered = preference(team, config, policy, std::move(committed), rng, false);

        auto queued = [&](MemberIndex m)
        {
            Ticks sum;
            for (const auto &t : queues[m])
            {
                sum += team.tasks.at(t).remaining;
            }
            return sum;
        };

        for (const auto &m : team.members)
        {
            if (m.absent_on(day))
            {
                continue;
            }
            const Ticks target = max_daily_progress(config, overtime);
            while (queued(m.index) < target)
            {
                std::vector<TaskId> eligible;
                auto consider = [&](bool restricted_only)
                {
                    for (const Story *s : ordered)
                    {
                        for (const auto &tid : s->tasks)
                        {
                            const auto &t = team.tasks.at(tid);
                            if (t.status == TaskStatus::Done || holder.contains(tid) || !role_allows(m, t))
                            {
                                continue;
                            }
                            if (restricted_only && !t.required_role)
                            {
                                continue;
                            }
                            eligible.push_back(tid);
                        }
                    }
                };
                if (policy.kind == BotKind::SpecialistAware && m.role != generalist_role)
                {
                    consider(true);
                }
                if (eligible.empty())
                {
                    consider(false);
                }
                if (eligible.empty())
                {
                    break;
                }
                const TaskId pick = policy.kind == BotKind::Random ? eligible[reduce(next_u64(rng), eligible.size())] : eligible.front();
                out.commands.push_back(AssignTask{m.index, pick, std::nullopt});
                holder[pick] = m.index;
                queues[m.index].push_back(pick);
            }
            if (overtime > zero_ticks && !queues[m.index].empty())
            {
                out.commands.push_back(SetOvertime{m.index, overtime});
            }
        }
        out.commands.push_back(CloseScrum{});
        out.rng = rng;
        return out;
    }
}
