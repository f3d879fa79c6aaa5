#pragma once

// Scenario builders and fuzz generators shared by the unit and acceptance tests.

#include "sprintsim/batch.hpp"
#include "sprintsim/bots.hpp"
#include "sprintsim/defaults.hpp"
#include "sprintsim/engine.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/service.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace sprintsim::testing
{
    inline Ticks h(double hours) { return Ticks{static_cast<std::int64_t>(hours * 2)}; }

    inline EventCard card(std::string id, EventKind kind, std::int64_t weight = 1)
    {
        EventCard c;
        c.id = id;
        c.title = std::move(id);
        c.kind = kind;
        c.weight = weight;
        return c;
    }

    inline std::vector<EventCard> quiet_deck() { return {card("quiet", EventKind::NoEvent)}; }

    inline StoryDef story(std::string id, int points, Priority priority, std::vector<double> task_hours,
                          std::vector<StoryId> deps = {}, StoryKind kind = StoryKind::User)
    {
        StoryDef s;
        s.id = id;
        s.title = "Story " + id;
        s.kind = kind;
        s.points = points;
        s.priority = priority;
        s.depends_on = std::move(deps);
        for (std::size_t k = 0; k < task_hours.size(); ++k)
        {
            s.tasks.push_back({id + "-T" + std::to_string(k + 1), h(task_hours[k]), std::nullopt});
        }
        return s;
    }

    // One team, quiet deck, default wheel.
    inline SessionConfig small_config(std::vector<StoryDef> backlog, int team_size = 5, int days = 10)
    {
        SessionConfig c = default_config();
        c.team_count = 1;
        c.team_size = team_size;
        c.sprint_length_days = days;
        c.event_deck = quiet_deck();
        c.backlog = std::move(backlog);
        return c;
    }

    // Hand-made draws for the current day: uses `event_index` (card position)
    // from sprint day 2 on.
    inline DayDraws scripted(const SessionState &s, std::vector<double> hours_per_member, std::size_t event_index = 0,
                             std::optional<MemberIndex> member = std::nullopt, std::vector<std::uint64_t> picks = {})
    {
        DayDraws d;
        d.day = s.calendar.absolute_day;
        d.sprint_day = s.calendar.sprint_day;
        if (d.sprint_day >= 2)
        {
            DrawnEvent e;
            e.card_index = event_index;
            e.card_id = s.config.event_deck.at(event_index).id;
            e.member = member;
            e.picks = std::move(picks);
            d.event = e;
        }
        for (std::size_t i = 0; i < hours_per_member.size(); ++i)
        {
            d.progress[static_cast<MemberIndex>(i + 1)] = h(hours_per_member[i]);
        }
        return d;
    }

    inline SessionState cmd(SessionState s, const Command &c, const TeamId &team = "T1")
    {
        return submit(std::move(s), team, c);
    }

    // Sum of remaining ticks over tasks of Committed stories, recomputed from
    // the board without engine helpers.
    inline std::int64_t committed_ticks(const TeamState &team)
    {
        std::int64_t sum = 0;
        for (const auto &[id, t] : team.tasks)
        {
            if (team.stories.at(t.story).status == StoryStatus::Committed)
            {
                sum += t.remaining.count();
            }
        }
        return sum;
    }

    // Random but valid configuration: DAG backlog, optional specialists,
    // mixed event deck.
    inline SessionConfig random_config(std::mt19937_64 &gen, int days = 10)
    {
        auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
        SessionConfig c = default_config();
        c.team_count = pick(1, 4);
        c.team_size = pick(1, 8);
        if (pick(0, 1) == 0)
        {
            c.sprint_length_days = days;
            c.sprint_count = 1;
        }
        else
        {
            c.sprint_length_days = days / 2;
            c.sprint_count = 2;
        }
        c.seed = gen();
        c.policy.overtime_productivity = pick(0, 1) ? 0.75 : 0.5;

        const std::vector<RoleName> roles = {"tester", "designer", "dba"};
        c.members.clear();
        if (pick(0, 2) == 0)
        {
            for (int i = 1; i <= c.team_size; ++i)
            {
                MemberDef m;
                m.index = i;
                m.name = "M" + std::to_string(i);
                m.role = pick(0, 2) == 0 ? roles[static_cast<std::size_t>(pick(0, 2))] : generalist_role;
                c.members.push_back(m);
            }
        }

        c.backlog.clear();
        const int stories = pick(2, 12);
        for (int s = 0; s < stories; ++s)
        {
            StoryDef def;
            def.id = "R" + std::to_string(s + 1);
            def.title = def.id;
            def.kind = pick(0, 4) == 0 ? StoryKind::Technical : StoryKind::User;
            def.points = pick(1, 13);
            def.priority = static_cast<Priority>(pick(0, 2));
            for (int d = 0; d < s; ++d)
            {
                if (pick(0, 5) == 0)
                {
                    def.depends_on.push_back("R" + std::to_string(d + 1));
                }
            }
            const int tasks = pick(1, 5);
            for (int t = 0; t < tasks; ++t)
            {
                TaskDef td;
                td.id = def.id + "-T" + std::to_string(t + 1);
                td.estimate = Ticks{pick(1, 24)};
                if (!c.members.empty() && pick(0, 3) == 0)
                {
                    td.required_role = roles[static_cast<std::size_t>(pick(0, 2))];
                }
                def.tasks.push_back(td);
            }
            c.backlog.push_back(def);
        }

        c.event_deck.clear();
        c.event_deck.push_back(card("quiet", EventKind::NoEvent, pick(1, 4)));
        const std::vector<EventKind> kinds = {EventKind::Defect, EventKind::AddStory, EventKind::Absence,
                                              EventKind::PriorityChange, EventKind::ScopeCut, EventKind::EstimateRevision};
        for (auto kind : kinds)
        {
            if (pick(0, 2) > 0)
            {
                auto e = card("card-" + std::to_string(c.event_deck.size()), kind, pick(1, 3));
                // Only the fields the kind uses, so the card survives a JSON round trip.
                switch (kind)
                {
                case EventKind::Defect:
                    e.params.hours = Ticks{pick(1, 16)};
                    break;
                case EventKind::AddStory:
                    e.params.priority = static_cast<Priority>(pick(0, 2));
                    e.params.task_estimates = {Ticks{pick(1, 12)}, Ticks{pick(1, 12)}};
                    break;
                case EventKind::Absence:
                    e.params.duration_days = pick(1, 4);
                    break;
                case EventKind::PriorityChange:
                    e.params.priority = static_cast<Priority>(pick(0, 2));
                    break;
                case EventKind::EstimateRevision:
                    e.params.delta = Ticks{pick(-8, 8)};
                    if (e.params.delta == zero_ticks)
                    {
                        e.params.delta = Ticks{2};
                    }
                    break;
                default:
                    break;
                }
                c.event_deck.push_back(e);
            }
        }
        return c;
    }

    // A random command aimed at a team: often sensible, sometimes invalid.
    inline Command random_command(const TeamState &team, const SessionConfig &config, std::mt19937_64 &gen)
    {
        auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
        std::vector<TaskId> tasks;
        for (const auto &[id, t] : team.tasks)
        {
            tasks.push_back(id);
        }
        std::vector<StoryId> stories;
        for (const auto &[id, s] : team.stories)
        {
            stories.push_back(id);
        }
        const MemberIndex m = pick(1, config.team_size + 1);
        switch (pick(0, 7))
        {
        case 0:
            return PlanCommit{{stories[static_cast<std::size_t>(pick(0, static_cast<int>(stories.size()) - 1))]}};
        case 1:
        case 2:
            return AssignTask{m, tasks[static_cast<std::size_t>(pick(0, static_cast<int>(tasks.size()) - 1))],
                              pick(0, 3) == 0 ? std::optional<std::size_t>(0) : std::nullopt};
        case 3:
            return UnassignTask{m, tasks[static_cast<std::size_t>(pick(0, static_cast<int>(tasks.size()) - 1))]};
        case 4:
            return SetOvertime{m, Ticks{pick(0, 5)}};
        case 5:
            return DropStory{stories[static_cast<std::size_t>(pick(0, static_cast<int>(stories.size()) - 1))]};
        case 6:
            return LogNote{"note " + std::to_string(pick(0, 999)), pick(0, 1) ? std::optional<MemberIndex>(m) : std::nullopt};
        default:
            return CloseScrum{};
        }
    }

    // Plays a live session: bot decisions interleaved with random commands
    // (rejected ones are simply not logged), gate override now and then.
    inline void play_fuzzed(LiveSession &live, std::mt19937_64 &gen, const BotPolicy &policy)
    {
        auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
        std::map<TeamId, RngState> rngs;
        for (const auto &[id, team] : live.state().teams)
        {
            rngs[id] = bot_rng(gen());
        }
        while (live.state().phase != Phase::Finished)
        {
            if (live.state().phase == Phase::SprintClosed)
            {
                live.close_sprint();
                continue;
            }
            for (auto &[id, rng] : rngs)
            {
                auto attempt = [&](const Command &c)
                {
                    try
                    {
                        live.post_command(id, c);
                    }
                    catch (const SimError &)
                    {
                    }
                };
                for (int k = pick(0, 3); k > 0; --k)
                {
                    attempt(random_command(live.state().teams.at(id), live.config(), gen));
                }
                if (live.state().phase == Phase::Planning)
                {
                    auto plan = plan_commands(live.state().teams.at(id), live.config(), policy, rng);
                    rng = plan.rng;
                    for (const auto &c : plan.commands)
                    {
                        attempt(c);
                    }
                }
                auto daily = day_commands(live.state().teams.at(id), live.config(), live.state().calendar, policy, rng);
                rng = daily.rng;
                for (const auto &c : daily.commands)
                {
                    if (!std::holds_alternative<CloseScrum>(c) || pick(0, 9) > 0)
                    {
                        attempt(c);
                    }
                }
            }
            if (pick(0, 4) == 0)
            {
                live.note("facilitator remark");
            }
            live.spin_day(!live.gate_open());
        }
    }

    inline std::string fixed_clock() { return "2026-01-01T00:00:00.000Z"; }

    // Scratch directory removed on destruction.
    struct TempDir
    {
        std::filesystem::path path;

        TempDir()
        {
            std::random_device rd;
            path = std::filesystem::temp_directory_path() / ("sprintsim-" + std::to_string(rd()) + std::to_string(rd()));
            std::filesystem::create_directories(path);
        }
        ~TempDir()
        {
            std::error_code ec;
            std::filesystem::remove_all(path, ec);
        }
        TempDir(const TempDir &) = delete;
        TempDir &operator=(const TempDir &) = delete;
    };

    // One bot-driven day through the service: planning if due, the daily
    // scrum for every team, then the spin (or the sprint close).
    inline void service_bot_step(SessionService &service, const SessionId &id, std::map<TeamId, RngState> &rngs,
                                 const BotPolicy &policy = {})
    {
        auto s = service.snapshot_state(id);
        if (s.phase == Phase::SprintClosed)
        {
            service.close_sprint(id);
            return;
        }
        for (const auto &[tid, team] : s.teams)
        {
            auto &rng = rngs.try_emplace(tid, bot_rng(s.config.seed ^ std::hash<std::string>{}(tid))).first->second;
            if (s.phase == Phase::Planning)
            {
                auto plan = plan_commands(service.snapshot_state(id).teams.at(tid), s.config, policy, rng);
                rng = plan.rng;
                for (const auto &c : plan.commands)
                {
                    service.post_command(id, tid, c);
                }
            }
            auto daily = day_commands(service.snapshot_state(id).teams.at(tid), s.config, s.calendar, policy, rng);
            rng = daily.rng;
            for (const auto &c : daily.commands)
            {
                service.post_command(id, tid, c);
            }
        }
        service.spin_day(id);
    }
}
