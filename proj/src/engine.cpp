#include "sprintsim/engine.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sprintsim
{
    std::string_view command_name(const Command &command)
    {
        static constexpr std::string_view names[] = {"PlanCommit", "AssignTask", "UnassignTask", "SetOvertime",
                                                     "DropStory", "LogNote", "FacilitatorNote", "CloseScrum"};
        return names[command.index()];
    }

    CommandContext context_of(const SessionState &session)
    {
        return {session.phase, session.calendar, &session.config};
    }

    Ticks committed_remaining(const TeamState &team)
    {
        Ticks sum;
        for (const auto &[id, task] : team.tasks)
        {
            if (team.stories.at(task.story).status == StoryStatus::Committed)
            {
                sum += task.remaining;
            }
        }
        return sum;
    }

    Ticks sprint_capacity(const SessionConfig &config)
    {
        return config.nominal_per_day * (static_cast<std::int64_t>(config.team_size) * config.sprint_length_days);
    }

    namespace
    {
        [[noreturn]] void fail(ErrorCode code, const std::string &message) { throw SimError(code, message); }

        std::string phase_name(Phase p) { return json(p).get<std::string>(); }

        void log(TeamState &team, int day, std::string author, LogKind kind, std::string text, json payload = json::object())
        {
            LogEntry e;
            e.seq = team.next_log_seq++;
            e.day = day;
            e.author = std::move(author);
            e.kind = kind;
            e.text = std::move(text);
            e.payload = std::move(payload);
            team.decision_log.push_back(std::move(e));
        }

        std::int64_t story_value(const Story &s, const PolicyConstants &pc)
        {
            return static_cast<std::int64_t>(pc.moscow.weight(s.priority)) * s.points;
        }

        void recompute_committed_value(TeamState &team, const PolicyConstants &pc)
        {
            std::int64_t v = 0;
            for (const auto &[id, s] : team.stories)
            {
                if (s.kind == StoryKind::User && s.status != StoryStatus::Backlog)
                {
                    v += story_value(s, pc);
                }
            }
            team.committed_value = v;
        }

        Task &task_of(TeamState &team, const TaskId &id)
        {
            auto it = team.tasks.find(id);
            if (it == team.tasks.end())
            {
                fail(ErrorCode::NotFound, "unknown task '" + id + "'");
            }
            return it->second;
        }

        Story &story_of(TeamState &team, const StoryId &id)
        {
            auto it = team.stories.find(id);
            if (it == team.stories.end())
            {
                fail(ErrorCode::NotFound, "unknown story '" + id + "'");
            }
            return it->second;
        }

        void settle_status(Task &task)
        {
            if (task.remaining == zero_ticks)
            {
                task.status = TaskStatus::Done;
            }
            else if (task.remaining < task.estimate)
            {
                task.status = TaskStatus::InProgress;
            }
            else
            {
                task.status = TaskStatus::ToDo;
            }
        }

        // Removes a task from whichever queue holds it.
        void unassign_everywhere(TeamState &team, const TaskId &id)
        {
            for (auto &[m, list] : team.assignments)
            {
                std::erase(list, id);
            }
            if (auto it = team.tasks.find(id); it != team.tasks.end())
            {
                settle_status(it->second);
            }
        }

        void unassign_story(TeamState &team, const Story &story)
        {
            for (const auto &tid : story.tasks)
            {
                unassign_everywhere(team, tid);
            }
        }

        std::optional<MemberIndex> holder_of(const TeamState &team, const TaskId &id)
        {
            for (const auto &[m, list] : team.assignments)
            {
                if (std::find(list.begin(), list.end(), id) != list.end())
                {
                    return m;
                }
            }
            return std::nullopt;
        }

        // Accepts committed stories whose tasks and dependencies are all Done.
        void accept_completed(TeamState &team, int day)
        {
            const auto order = topological_order(team.stories);
            if (!order)
            {
                fail(ErrorCode::Internal, "dependency cycle in team board");
            }
            for (const auto &sid : *order)
            {
                auto &story = team.stories.at(sid);
                if (story.status != StoryStatus::Committed)
                {
                    continue;
                }
                const bool tasks_done = std::all_of(story.tasks.begin(), story.tasks.end(),
                                                    [&](const TaskId &t) { return team.tasks.at(t).status == TaskStatus::Done; });
                const bool deps_done = std::all_of(story.depends_on.begin(), story.depends_on.end(),
                                                   [&](const StoryId &d)
                                                   {
                                                       auto it = team.stories.find(d);
                                                       return it == team.stories.end() || it->second.status == StoryStatus::Done;
                                                   });
                if (tasks_done && deps_done)
                {
                    story.status = StoryStatus::Done;
                    log(team, day, "engine", LogKind::Event, "story " + sid + " accepted", {{"story", sid}, {"accepted", true}});
                }
            }
        }

        ReleasePoint release_point(const TeamState &team, int boundary)
        {
            ReleasePoint p;
            p.boundary = boundary;
            for (const auto &[id, s] : team.stories)
            {
                if (s.status == StoryStatus::Done)
                {
                    continue;
                }
                (s.kind == StoryKind::User ? p.user_points : p.technical_points) += s.points;
            }
            return p;
        }

        std::vector<std::string> commit_stories(TeamState &team, const std::vector<StoryId> &ids, const CommandContext &ctx)
        {
            const auto &config = *ctx.config;
            std::set<StoryId> batch(ids.begin(), ids.end());
            for (const auto &id : batch)
            {
                const auto &story = story_of(team, id);
                if (story.status == StoryStatus::Done)
                {
                    fail(ErrorCode::Lifecycle, "story '" + id + "' is already Done");
                }
                if (ctx.phase == Phase::InDay && story.origin != Origin::EventInjected && story.status == StoryStatus::Backlog)
                {
                    fail(ErrorCode::Phase, "only event stories may be committed after the sprint has started");
                }
                for (const auto &dep : story.depends_on)
                {
                    const auto &d = team.stories.at(dep);
                    if (d.status == StoryStatus::Backlog && !batch.contains(dep))
                    {
                        fail(ErrorCode::Dependency, "story '" + id + "' depends on uncommitted story '" + dep + "'");
                    }
                }
            }
            for (const auto &id : batch)
            {
                auto &story = team.stories.at(id);
                if (story.status == StoryStatus::Backlog)
                {
                    story.status = StoryStatus::Committed;
                }
            }
            if (ctx.phase == Phase::Planning)
            {
                recompute_committed_value(team, config.policy);
            }

            std::vector<std::string> warnings;
            const auto capacity = sprint_capacity(config);
            const auto planned = committed_remaining(team);
            if (planned > capacity)
            {
                std::ostringstream os;
                os << "committed " << planned.hours() << "h exceeds sprint capacity of " << capacity.hours() << "h";
                warnings.push_back(os.str());
            }
            return warnings;
        }

        void require_phase(const CommandContext &ctx, std::initializer_list<Phase> allowed, std::string_view what)
        {
            if (std::find(allowed.begin(), allowed.end(), ctx.phase) == allowed.end())
            {
                fail(ErrorCode::Phase, std::string(what) + " not allowed in phase " + phase_name(ctx.phase));
            }
        }

        void check_present(const Member &m, int day)
        {
            if (m.absent_on(day))
            {
                fail(ErrorCode::Absent, "member " + std::to_string(m.index) + " is absent on day " + std::to_string(day));
            }
        }

        std::string author_of(const Command &command)
        {
            if (std::holds_alternative<FacilitatorNote>(command))
            {
                return "facilitator";
            }
            if (const auto *note = std::get_if<LogNote>(&command); note && note->author)
            {
                return std::to_string(*note->author);
            }
            return "team";
        }
    }

    SessionState init_session(const SessionConfig &config)
    {
        const auto violations = validate_config(config);
        if (!violations.empty())
        {
            std::ostringstream os;
            os << "invalid config:";
            for (const auto &v : violations)
            {
                os << ' ' << v.field << ": " << v.rule << ';';
            }
            throw SimError(ErrorCode::Validation, os.str());
        }
        // Wheels are validated again by construction.
        build_wheel(config.progress_wheel);
        build_wheel(event_wheel_config(config.event_deck));

        TeamState templ;
        templ.members = roster(config);
        for (std::size_t i = 0; i < config.backlog.size(); ++i)
        {
            const auto &def = config.backlog[i];
            Story s;
            s.id = def.id;
            s.title = def.title;
            s.kind = def.kind;
            s.points = def.points;
            s.priority = def.priority;
            s.depends_on = {def.depends_on.begin(), def.depends_on.end()};
            s.order = static_cast<int>(i);
            for (const auto &tdef : def.tasks)
            {
                Task t;
                t.id = tdef.id;
                t.story = def.id;
                t.estimate = tdef.estimate;
                t.remaining = tdef.estimate;
                t.required_role = tdef.required_role;
                s.tasks.push_back(t.id);
                templ.tasks.emplace(t.id, std::move(t));
            }
            templ.stories.emplace(s.id, std::move(s));
        }
        for (const auto &m : templ.members)
        {
            templ.assignments[m.index];
        }
        templ.release_history.push_back(release_point(templ, 0));

        SessionState session;
        session.config = config;
        session.rng = RngState{config.seed, 0};
        for (int t = 1; t <= config.team_count; ++t)
        {
            TeamState team = templ;
            team.id = "T" + std::to_string(t);
            session.teams.emplace(team.id, std::move(team));
        }
        return session;
    }

    PlanResult plan_sprint(TeamState team, const std::vector<StoryId> &story_ids, const CommandContext &ctx)
    {
        require_phase(ctx, {Phase::Planning, Phase::InDay}, "PlanCommit");
        auto warnings = commit_stories(team, story_ids, ctx);
        json payload = json(Command{PlanCommit{story_ids}});
        if (!warnings.empty())
        {
            payload["warnings"] = warnings;
        }
        log(team, ctx.calendar.absolute_day, "team", LogKind::Decision, "PlanCommit", std::move(payload));
        return {std::move(team), std::move(warnings)};
    }

    TeamState submit_command(TeamState team, const Command &command, const CommandContext &ctx)
    {
        if (ctx.phase == Phase::Finished)
        {
            fail(ErrorCode::Phase, "session is finished");
        }
        const int day = ctx.calendar.absolute_day;
        const auto &pc = ctx.config->policy;

        if (const auto *plan = std::get_if<PlanCommit>(&command))
        {
            return plan_sprint(std::move(team), plan->stories, ctx).team;
        }

        const bool is_note = std::holds_alternative<LogNote>(command) || std::holds_alternative<FacilitatorNote>(command);
        if (!is_note)
        {
            require_phase(ctx, {Phase::Planning, Phase::InDay}, command_name(command));
        }

        std::visit(
            [&](const auto &cmd)
            {
                using T = std::decay_t<decltype(cmd)>;
                if constexpr (std::is_same_v<T, AssignTask>)
                {
                    auto &member = team.member(cmd.member);
                    auto &task = task_of(team, cmd.task);
                    if (task.status == TaskStatus::Done)
                    {
                        fail(ErrorCode::Lifecycle, "task '" + cmd.task + "' is already Done");
                    }
                    if (team.stories.at(task.story).status != StoryStatus::Committed)
                    {
                        fail(ErrorCode::Lifecycle, "task '" + cmd.task + "' belongs to an uncommitted story");
                    }
                    check_present(member, day);
                    if (!role_allows(member, task))
                    {
                        fail(ErrorCode::SpecialistMismatch, "task '" + cmd.task + "' requires role '" + *task.required_role +
                                                                "' but member " + std::to_string(member.index) +
                                                                " is '" + member.role + "'");
                    }
                    if (const auto holder = holder_of(team, cmd.task); holder && *holder != cmd.member)
                    {
                        fail(ErrorCode::Lifecycle, "task '" + cmd.task + "' is already assigned to member " + std::to_string(*holder));
                    }
                    auto &queue = team.assignments[cmd.member];
                    std::erase(queue, cmd.task);
                    const auto pos = std::min(cmd.position.value_or(queue.size()), queue.size());
                    queue.insert(queue.begin() + static_cast<std::ptrdiff_t>(pos), cmd.task);
                    task.status = TaskStatus::InProgress;
                }
                else if constexpr (std::is_same_v<T, UnassignTask>)
                {
                    team.member(cmd.member);
                    auto &queue = team.assignments[cmd.member];
                    if (std::find(queue.begin(), queue.end(), cmd.task) == queue.end())
                    {
                        fail(ErrorCode::NotFound, "task '" + cmd.task + "' is not assigned to member " + std::to_string(cmd.member));
                    }
                    std::erase(queue, cmd.task);
                    settle_status(task_of(team, cmd.task));
                }
                else if constexpr (std::is_same_v<T, SetOvertime>)
                {
                    auto &member = team.member(cmd.member);
                    check_present(member, day);
                    if (cmd.hours < zero_ticks || cmd.hours > pc.max_overtime_per_day)
                    {
                        std::ostringstream os;
                        os << "overtime " << cmd.hours.hours() << "h outside 0.." << pc.max_overtime_per_day.hours() << "h";
                        fail(ErrorCode::OvertimeCap, os.str());
                    }
                    member.overtime_today = cmd.hours;
                }
                else if constexpr (std::is_same_v<T, DropStory>)
                {
                    auto &story = story_of(team, cmd.story);
                    if (story.status != StoryStatus::Committed)
                    {
                        fail(ErrorCode::Lifecycle, "story '" + cmd.story + "' is not committed");
                    }
                    story.status = StoryStatus::Backlog;
                    unassign_story(team, story);
                }
                else if constexpr (std::is_same_v<T, CloseScrum>)
                {
                    team.scrum_closed = true;
                }
                else if constexpr (std::is_same_v<T, LogNote> || std::is_same_v<T, FacilitatorNote>)
                {
                    if (ctx.phase == Phase::Finished)
                    {
                        fail(ErrorCode::Phase, "session is finished");
                    }
                    if constexpr (std::is_same_v<T, LogNote>)
                    {
                        if (cmd.author && !team.has_member(*cmd.author))
                        {
                            fail(ErrorCode::NotFound, "no member with index " + std::to_string(*cmd.author));
                        }
                    }
                }
            },
            command);

        std::string text{command_name(command)};
        LogKind kind = LogKind::Decision;
        if (const auto *n = std::get_if<LogNote>(&command))
        {
            text = n->text;
        }
        else if (const auto *f = std::get_if<FacilitatorNote>(&command))
        {
            text = f->text;
            kind = LogKind::Note;
        }
        log(team, day, author_of(command), kind, std::move(text), json(command));
        return team;
    }

    SessionState submit(SessionState session, const TeamId &team_id, const Command &command)
    {
        auto it = session.teams.find(team_id);
        if (it == session.teams.end())
        {
            fail(ErrorCode::NotFound, "unknown team '" + team_id + "'");
        }
        if (session.phase == Phase::SprintClosed && !std::holds_alternative<LogNote>(command) &&
            !std::holds_alternative<FacilitatorNote>(command))
        {
            fail(ErrorCode::Phase, std::string(command_name(command)) + " not allowed in phase SprintClosed");
        }
        it->second = submit_command(std::move(it->second), command, context_of(session));
        return session;
    }

    std::pair<TeamState, EventOutcome> apply_event(TeamState team, const EventCard &card, const DrawnEvent &drawn,
                                                   const CommandContext &ctx)
    {
        const int day = ctx.calendar.absolute_day;
        const auto &p = card.params;
        EventOutcome out;
        json payload = {{"card", card.id}, {"kind", to_string(card.kind)}, {"draw", drawn}};

        auto pick_from = [&](const auto &candidates) -> std::optional<std::size_t>
        {
            if (candidates.empty())
            {
                return std::nullopt;
            }
            const std::uint64_t raw = drawn.picks.empty() ? 0 : drawn.picks.front();
            return static_cast<std::size_t>(reduce(raw, candidates.size()));
        };

        // Open, non-synthetic stories ordered by backlog position.
        auto stories_where = [&](auto pred)
        {
            std::vector<const Story *> v;
            for (const auto &[id, s] : team.stories)
            {
                if (id != quality_story_id && pred(s))
                {
                    v.push_back(&s);
                }
            }
            std::sort(v.begin(), v.end(), [](const Story *a, const Story *b) { return std::tie(a->order, a->id) < std::tie(b->order, b->id); });
            return v;
        };

        switch (card.kind)
        {
        case EventKind::NoEvent:
            out.effect = "no event";
            break;

        case EventKind::Defect:
        {
            auto [qit, created] = team.stories.try_emplace(quality_story_id);
            auto &quality = qit->second;
            if (created)
            {
                quality.id = quality_story_id;
                quality.title = "Quality (injected defects)";
                quality.kind = StoryKind::Technical;
                quality.points = 0;
                quality.priority = Priority::Must;
                quality.origin = Origin::EventInjected;
                int max_order = 0;
                for (const auto &[id, s] : team.stories)
                {
                    max_order = std::max(max_order, s.order);
                }
                quality.order = max_order + 1;
            }
            // Recommitting a carried-over quality story brings its open defects back into scope.
            Ticks revived;
            if (quality.status != StoryStatus::Committed)
            {
                for (const auto &tid : quality.tasks)
                {
                    revived += team.tasks.at(tid).remaining;
                }
            }
            quality.status = StoryStatus::Committed;
            Task t;
            t.id = "DEFECT-d" + std::to_string(day);
            t.story = quality_story_id;
            t.estimate = p.hours;
            t.remaining = p.hours;
            t.origin = Origin::EventInjected;
            quality.tasks.push_back(t.id);
            payload["task"] = t.id;
            payload["urgent"] = true;
            out.effect = "urgent defect task " + t.id + " injected";
            team.tasks.emplace(t.id, std::move(t));
            out.scope_delta = p.hours + revived;
            if (revived > zero_ticks)
            {
                payload["revived_ticks"] = revived;
            }
            break;
        }

        case EventKind::AddStory:
        {
            Story s;
            s.id = "EVT-d" + std::to_string(day);
            s.title = card.title;
            s.kind = p.story_kind;
            s.points = p.points;
            s.priority = p.priority;
            s.status = StoryStatus::Backlog;
            s.origin = Origin::EventInjected;
            int max_order = 0;
            for (const auto &[id, other] : team.stories)
            {
                max_order = std::max(max_order, other.order);
            }
            s.order = max_order + 1;
            for (std::size_t k = 0; k < p.task_estimates.size(); ++k)
            {
                Task t;
                t.id = s.id + "-T" + std::to_string(k + 1);
                t.story = s.id;
                t.estimate = p.task_estimates[k];
                t.remaining = p.task_estimates[k];
                t.origin = Origin::EventInjected;
                s.tasks.push_back(t.id);
                team.tasks.emplace(t.id, std::move(t));
            }
            payload["story"] = s.id;
            out.effect = "story " + s.id + " (" + std::to_string(s.points) + " points) added to backlog";
            team.stories.emplace(s.id, std::move(s));
            break;
        }

        case EventKind::Absence:
        {
            const MemberIndex who = drawn.member.value_or(p.member.value_or(1));
            if (!team.has_member(who))
            {
                out.fizzled = true;
                out.effect = "no member " + std::to_string(who);
                break;
            }
            auto &m = team.member(who);
            const int from = day + 1;
            const int until = day + p.duration_days;
            if (m.absent_on(day) || m.absent_on(from))
            {
                m.absent_until = std::max(*m.absent_until, until);
            }
            else
            {
                m.absent_from = from;
                m.absent_until = until;
            }
            std::vector<TaskId> released = team.assignments[who];
            for (const auto &tid : released)
            {
                unassign_everywhere(team, tid);
            }
            payload["member"] = who;
            payload["absent_from"] = *m.absent_from;
            payload["absent_until"] = *m.absent_until;
            payload["released"] = released;
            out.effect = "member " + std::to_string(who) + " absent days " + std::to_string(*m.absent_from) + ".." +
                         std::to_string(*m.absent_until);
            break;
        }

        case EventKind::PriorityChange:
        {
            const Story *target = nullptr;
            if (p.story)
            {
                auto it = team.stories.find(*p.story);
                target = it == team.stories.end() || it->second.status == StoryStatus::Done ? nullptr : &it->second;
            }
            else
            {
                const auto open = stories_where([](const Story &s) { return s.status != StoryStatus::Done; });
                if (const auto i = pick_from(open))
                {
                    target = open[*i];
                }
            }
            if (!target)
            {
                out.fizzled = true;
                out.effect = "no open story to reprioritize";
                break;
            }
            auto &story = team.stories.at(target->id);
            payload["story"] = story.id;
            payload["from"] = story.priority;
            payload["to"] = p.priority;
            story.priority = p.priority;
            out.effect = "story " + story.id + " reprioritized to " + json(p.priority).get<std::string>();
            break;
        }

        case EventKind::ScopeCut:
        {
            const Story *target = nullptr;
            if (p.story)
            {
                auto it = team.stories.find(*p.story);
                target = it == team.stories.end() || it->second.status != StoryStatus::Committed ? nullptr : &it->second;
            }
            else
            {
                const auto open = stories_where([](const Story &s) { return s.status == StoryStatus::Committed; });
                if (const auto i = pick_from(open))
                {
                    target = open[*i];
                }
            }
            if (!target)
            {
                out.fizzled = true;
                out.effect = "no committed story to cut";
                break;
            }
            auto &story = team.stories.at(target->id);
            Ticks removed;
            for (const auto &tid : story.tasks)
            {
                removed += team.tasks.at(tid).remaining;
            }
            story.status = StoryStatus::Backlog;
            unassign_story(team, story);
            payload["story"] = story.id;
            payload["removed_ticks"] = removed;
            out.scope_delta = zero_ticks - removed;
            out.effect = "story " + story.id + " cut from the sprint";
            break;
        }

        case EventKind::EstimateRevision:
        {
            Task *target = nullptr;
            if (p.task)
            {
                auto it = team.tasks.find(*p.task);
                target = it == team.tasks.end() || it->second.status == TaskStatus::Done ? nullptr : &it->second;
            }
            else
            {
                std::vector<Task *> open;
                for (const Story *s : stories_where([](const Story &s) { return s.status == StoryStatus::Committed; }))
                {
                    for (const auto &tid : s->tasks)
                    {
                        auto &t = team.tasks.at(tid);
                        if (t.status != TaskStatus::Done)
                        {
                            open.push_back(&t);
                        }
                    }
                }
                if (const auto i = pick_from(open))
                {
                    target = open[*i];
                }
            }
            if (!target)
            {
                out.fizzled = true;
                out.effect = "no open task to re-estimate";
                break;
            }
            const Ticks before = target->remaining;
            const Ticks after = std::max(Ticks{1}, before + p.delta);
            const Ticks change = after - before;
            target->remaining = after;
            target->estimate += change;
            settle_status(*target);
            if (holder_of(team, target->id))
            {
                target->status = TaskStatus::InProgress;
            }
            if (team.stories.at(target->story).status == StoryStatus::Committed)
            {
                out.scope_delta = change;
            }
            payload["task"] = target->id;
            payload["delta_ticks"] = change;
            std::ostringstream os;
            os << "task " << target->id << " re-estimated by " << change.hours() << "h";
            out.effect = os.str();
            break;
        }
        }

        payload["fizzled"] = out.fizzled;
        payload["scope_delta_ticks"] = out.scope_delta;
        log(team, day, "engine", LogKind::Event, card.title + (out.fizzled ? " (no effect)" : "") + ": " + out.effect, std::move(payload));
        return {std::move(team), std::move(out)};
    }

    Ticks effective_progress(Ticks drawn, Ticks overtime, Ticks nominal, double overtime_productivity)
    {
        constexpr std::int64_t scale = 10000;
        const auto productivity = static_cast<std::int64_t>(std::llround(overtime_productivity * scale));
        const auto num = static_cast<__int128>(drawn.count()) * (nominal.count() * scale + productivity * overtime.count());
        const auto den = static_cast<__int128>(nominal.count()) * scale;
        return Ticks{static_cast<std::int64_t>(num / den)};
    }

    std::pair<TeamState, ProgressOutcome> apply_progress(TeamState team, MemberIndex member_index, Ticks drawn,
                                                         const CommandContext &ctx)
    {
        const int day = ctx.calendar.absolute_day;
        const auto &config = *ctx.config;
        ProgressOutcome out;
        out.member = member_index;
        out.drawn = drawn;
        team.drawn_total += drawn;

        auto &member = team.member(member_index);
        if (member.absent_on(day))
        {
            out.absent = true;
            log(team, day, "engine", LogKind::Progress, "member " + std::to_string(member_index) + " absent",
                {{"member", member_index}, {"drawn_ticks", drawn}, {"absent", true}});
            return {std::move(team), std::move(out)};
        }

        const Ticks overtime = member.overtime_today;
        out.effective = effective_progress(drawn, overtime, config.nominal_per_day, config.policy.overtime_productivity);
        team.charged_regular += config.nominal_per_day;
        team.charged_overtime += overtime;

        Ticks left = out.effective;
        auto &queue = team.assignments[member_index];
        json touched = json::array();
        while (left > zero_ticks && !queue.empty())
        {
            auto &task = team.tasks.at(queue.front());
            const Ticks take = std::min(left, task.remaining);
            task.remaining -= take;
            left -= take;
            out.applied += take;
            touched.push_back({{"task", task.id}, {"applied_ticks", take}, {"remaining_ticks", task.remaining}});
            if (task.remaining == zero_ticks)
            {
                task.status = TaskStatus::Done;
                task.completed_day = day;
                out.completed.push_back(task.id);
                queue.erase(queue.begin());
            }
            else
            {
                task.status = TaskStatus::InProgress;
            }
        }
        out.idle = out.effective - out.applied;
        team.idle_total += out.idle;

        std::ostringstream os;
        os << "member " << member_index << " progressed " << out.applied.hours() << "h";
        if (out.idle > zero_ticks)
        {
            os << ", idle " << out.idle.hours() << "h";
        }
        log(team, day, "engine", LogKind::Progress, os.str(),
            {{"member", member_index},
             {"drawn_ticks", drawn},
             {"overtime_ticks", overtime},
             {"effective_ticks", out.effective},
             {"applied_ticks", out.applied},
             {"idle_ticks", out.idle},
             {"tasks", std::move(touched)}});
        return {std::move(team), std::move(out)};
    }

    AdvanceResult advance_day(SessionState session)
    {
        if (session.phase != Phase::Planning && session.phase != Phase::InDay)
        {
            fail(ErrorCode::Phase, "cannot advance a day in phase " + phase_name(session.phase));
        }
        const auto &config = session.config;
        const Wheel progress = build_wheel(config.progress_wheel);
        const Wheel events = build_wheel(event_wheel_config(config.event_deck));
        auto drawn = draw_day(session.calendar.absolute_day, session.calendar.sprint_day, config.team_size, progress,
                              events, config.event_deck, session.rng);
        return advance_day_with(std::move(session), std::move(drawn.first));
    }

    AdvanceResult advance_day_with(SessionState session, DayDraws draws)
    {
        if (session.phase != Phase::Planning && session.phase != Phase::InDay)
        {
            fail(ErrorCode::Phase, "cannot advance a day in phase " + phase_name(session.phase));
        }
        const auto &config = session.config;
        auto &cal = session.calendar;
        if (draws.day != cal.absolute_day || draws.sprint_day != cal.sprint_day)
        {
            fail(ErrorCode::Integrity, "draws for day " + std::to_string(draws.day) + " applied on day " + std::to_string(cal.absolute_day));
        }
        if (draws.event.has_value() != (cal.sprint_day >= 2))
        {
            fail(ErrorCode::Integrity, "event presence does not match sprint day " + std::to_string(cal.sprint_day));
        }
        if (static_cast<int>(draws.progress.size()) != config.team_size)
        {
            fail(ErrorCode::Integrity, "draws carry " + std::to_string(draws.progress.size()) + " progress values for a team of " +
                                           std::to_string(config.team_size));
        }
        const EventCard *card = nullptr;
        if (draws.event)
        {
            if (draws.event->card_index >= config.event_deck.size() ||
                config.event_deck[draws.event->card_index].id != draws.event->card_id)
            {
                fail(ErrorCode::Integrity, "drawn card '" + draws.event->card_id + "' does not match the deck");
            }
            card = &config.event_deck[draws.event->card_index];
        }

        const bool starting = session.phase == Phase::Planning;
        session.phase = Phase::InDay;
        const CommandContext ctx = context_of(session);

        AdvanceResult result;
        for (auto &[tid, team] : session.teams)
        {
            if (starting)
            {
                team.burndown_origin.push_back(committed_remaining(team));
            }
            TeamDayOutcome day;
            day.remaining_before = committed_remaining(team);
            if (card)
            {
                auto [next, ev] = apply_event(std::move(team), *card, *draws.event, ctx);
                team = std::move(next);
                day.event_added = ev.scope_delta;
                day.event = std::move(ev);
            }
            for (const auto &[m, value] : draws.progress)
            {
                auto [next, po] = apply_progress(std::move(team), m, value, ctx);
                team = std::move(next);
                day.effective += po.effective;
                day.applied += po.applied;
                day.idle += po.idle;
                day.members.push_back(std::move(po));
            }
            day.remaining_after = committed_remaining(team);
            accept_completed(team, cal.absolute_day);
            team.burndown_actual.push_back({cal.sprint_index, cal.sprint_day, day.remaining_after});
            for (auto &m : team.members)
            {
                m.overtime_today = zero_ticks;
            }
            team.scrum_closed = false;
            result.outcomes.emplace(tid, std::move(day));
        }

        session.rng = session.rng.advanced(draws.rng_steps);
        session.draw_history.push_back(draws);
        session.phase = Phase::DayClosed;
        if (cal.sprint_day < config.sprint_length_days)
        {
            ++cal.sprint_day;
            ++cal.absolute_day;
            session.phase = Phase::InDay;
        }
        else
        {
            session.phase = Phase::SprintClosed;
        }
        result.draws = std::move(draws);
        result.state = std::move(session);
        return result;
    }

    SessionState close_sprint(SessionState session)
    {
        if (session.phase != Phase::SprintClosed)
        {
            fail(ErrorCode::Phase, "cannot close the sprint in phase " + phase_name(session.phase));
        }
        auto &cal = session.calendar;
        for (auto &[tid, team] : session.teams)
        {
            accept_completed(team, cal.absolute_day);
            json carried = json::array();
            for (auto &[sid, story] : team.stories)
            {
                if (story.status != StoryStatus::Committed)
                {
                    continue;
                }
                Ticks remaining;
                for (const auto &t : story.tasks)
                {
                    remaining += team.tasks.at(t).remaining;
                }
                story.status = StoryStatus::Backlog;
                carried.push_back({{"story", sid}, {"remaining_ticks", remaining}});
            }
            for (auto &[m, list] : team.assignments)
            {
                for (const auto &t : list)
                {
                    settle_status(team.tasks.at(t));
                }
                list.clear();
            }
            team.release_history.push_back(release_point(team, cal.sprint_index));
            log(team, cal.absolute_day, "engine", LogKind::Event, "sprint " + std::to_string(cal.sprint_index) + " closed",
                {{"sprint", cal.sprint_index}, {"carried", std::move(carried)}});
        }
        if (cal.sprint_index < session.config.sprint_count)
        {
            ++cal.sprint_index;
            cal.sprint_day = 1;
            ++cal.absolute_day;
            session.phase = Phase::Planning;
        }
        else
        {
            session.phase = Phase::Finished;
        }
        return session;
    }

    SessionState apply_step(SessionState session, const ReplayStep &step)
    {
        return std::visit(
            [&](const auto &action) -> SessionState
            {
                using T = std::decay_t<decltype(action)>;
                if constexpr (std::is_same_v<T, ReplayCommand>)
                {
                    return submit(std::move(session), action.team, action.command);
                }
                else if constexpr (std::is_same_v<T, ReplayDraws>)
                {
                    return advance_day_with(std::move(session), action.draws).state;
                }
                else
                {
                    return close_sprint(std::move(session));
                }
            },
            step.action);
    }

    SessionState replay(const SessionConfig &config, std::span<const ReplayStep> steps)
    {
        SessionState state = init_session(config);
        std::int64_t last = 0;
        for (const auto &step : steps)
        {
            if (step.seq <= last)
            {
                fail(ErrorCode::Integrity, "replay step " + std::to_string(step.seq) + " out of order");
            }
            last = step.seq;
            try
            {
                state = apply_step(std::move(state), step);
            }
            catch (const SimError &e)
            {
                if (e.code() == ErrorCode::Integrity)
                {
                    throw;
                }
                fail(ErrorCode::Integrity, "record " + std::to_string(step.seq) + " does not replay: " + e.what());
            }
        }
        return state;
    }
}
