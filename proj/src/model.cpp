#include "sprintsim/model.hpp"
#include "sprintsim/error.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace sprintsim
{
    std::string_view error_code_name(ErrorCode code) noexcept
    {
        switch (code)
        {
        case ErrorCode::Validation: return "VALIDATION_ERROR";
        case ErrorCode::Configuration: return "CONFIG_ERROR";
        case ErrorCode::Phase: return "PHASE_ERROR";
        case ErrorCode::SpecialistMismatch: return "SPECIALIST_MISMATCH";
        case ErrorCode::Lifecycle: return "LIFECYCLE_ERROR";
        case ErrorCode::OvertimeCap: return "OVERTIME_CAP";
        case ErrorCode::Dependency: return "DEPENDENCY_ERROR";
        case ErrorCode::Absent: return "ABSENT_MEMBER";
        case ErrorCode::NotFound: return "NOT_FOUND";
        case ErrorCode::Integrity: return "INTEGRITY_ERROR";
        case ErrorCode::Auth: return "AUTH_ERROR";
        case ErrorCode::Format: return "FORMAT_ERROR";
        case ErrorCode::Conflict: return "VERSION_CONFLICT";
        case ErrorCode::NoSolution: return "NO_SOLUTION";
        case ErrorCode::Usage: return "USAGE_ERROR";
        case ErrorCode::Io: return "IO_ERROR";
        case ErrorCode::Internal: return "INTERNAL_ERROR";
        }
        return "INTERNAL_ERROR";
    }

    const Member &TeamState::member(MemberIndex index) const
    {
        if (index < 1 || index > static_cast<int>(members.size()))
        {
            throw SimError(ErrorCode::NotFound, "no member with index " + std::to_string(index));
        }
        return members[static_cast<std::size_t>(index - 1)];
    }

    Member &TeamState::member(MemberIndex index)
    {
        return const_cast<Member &>(std::as_const(*this).member(index));
    }

    bool TeamState::has_member(MemberIndex index) const
    {
        return index >= 1 && index <= static_cast<int>(members.size());
    }

    bool role_allows(const Member &member, const Task &task)
    {
        return !task.required_role || *task.required_role == member.role;
    }

    std::optional<std::vector<StoryId>> topological_order(const std::map<StoryId, Story> &stories)
    {
        std::map<StoryId, int> indegree;
        std::map<StoryId, std::vector<StoryId>> dependents;
        for (const auto &[id, story] : stories)
        {
            indegree.try_emplace(id, 0);
            for (const auto &dep : story.depends_on)
            {
                if (!stories.contains(dep))
                {
                    continue;
                }
                ++indegree[id];
                dependents[dep].push_back(id);
            }
        }

        auto later = [&](const StoryId &a, const StoryId &b)
        {
            const auto &sa = stories.at(a);
            const auto &sb = stories.at(b);
            return std::tie(sa.order, sa.id) > std::tie(sb.order, sb.id);
        };
        std::priority_queue<StoryId, std::vector<StoryId>, decltype(later)> ready(later);
        for (const auto &[id, deg] : indegree)
        {
            if (deg == 0)
            {
                ready.push(id);
            }
        }

        std::vector<StoryId> out;
        out.reserve(stories.size());
        while (!ready.empty())
        {
            StoryId id = ready.top();
            ready.pop();
            out.push_back(id);
            for (const auto &next : dependents[id])
            {
                if (--indegree[next] == 0)
                {
                    ready.push(next);
                }
            }
        }
        if (out.size() != stories.size())
        {
            return std::nullopt;
        }
        return out;
    }

    std::vector<Member> roster(const SessionConfig &config)
    {
        std::vector<Member> members;
        if (!config.members.empty())
        {
            auto defs = config.members;
            std::sort(defs.begin(), defs.end(), [](const auto &a, const auto &b) { return a.index < b.index; });
            for (const auto &def : defs)
            {
                Member m;
                m.index = def.index;
                m.name = def.name.empty() ? "Member " + std::to_string(def.index) : def.name;
                m.role = def.role;
                members.push_back(std::move(m));
            }
            return members;
        }
        for (int i = 1; i <= config.team_size; ++i)
        {
            Member m;
            m.index = i;
            m.name = "Member " + std::to_string(i);
            members.push_back(std::move(m));
        }
        return members;
    }

    namespace
    {
        class Collector
        {
        public:
            void add(std::string field, std::string rule) { out.push_back({std::move(field), std::move(rule)}); }
            std::vector<Violation> out;
        };

        std::string at(std::string_view base, std::size_t i)
        {
            std::ostringstream os;
            os << base << '[' << i << ']';
            return os.str();
        }

        void check_deck(const SessionConfig &config, const std::set<StoryId> &story_ids,
                        const std::set<TaskId> &task_ids, Collector &c)
        {
            if (config.event_deck.empty())
            {
                c.add("event_deck", "must contain at least one card (use a NoEvent card for quiet days)");
            }
            std::set<std::string> seen;
            for (std::size_t i = 0; i < config.event_deck.size(); ++i)
            {
                const auto &card = config.event_deck[i];
                const auto f = at("event_deck", i);
                if (card.id.empty())
                {
                    c.add(f + ".id", "must not be empty");
                }
                else if (!seen.insert(card.id).second)
                {
                    c.add(f + ".id", "duplicate card id '" + card.id + "'");
                }
                if (card.weight < 1)
                {
                    c.add(f + ".weight", "must be >= 1");
                }
                const auto &p = card.params;
                switch (card.kind)
                {
                case EventKind::Defect:
                    if (p.hours <= zero_ticks)
                    {
                        c.add(f + ".params.hours_ticks", "must be > 0");
                    }
                    break;
                case EventKind::AddStory:
                    if (p.points < 1)
                    {
                        c.add(f + ".params.points", "must be >= 1");
                    }
                    if (p.task_estimates.empty())
                    {
                        c.add(f + ".params.task_ticks", "must list at least one task");
                    }
                    for (std::size_t k = 0; k < p.task_estimates.size(); ++k)
                    {
                        if (p.task_estimates[k] <= zero_ticks)
                        {
                            c.add(at(f + ".params.task_ticks", k), "must be > 0");
                        }
                    }
                    break;
                case EventKind::Absence:
                    if (p.duration_days < 1)
                    {
                        c.add(f + ".params.duration_days", "must be >= 1");
                    }
                    if (p.member && (*p.member < 1 || *p.member > config.team_size))
                    {
                        c.add(f + ".params.member", "must be within 1..team_size");
                    }
                    break;
                case EventKind::PriorityChange:
                case EventKind::ScopeCut:
                    if (p.story && !story_ids.contains(*p.story))
                    {
                        c.add(f + ".params.story", "unknown story '" + *p.story + "'");
                    }
                    break;
                case EventKind::EstimateRevision:
                    if (p.delta == zero_ticks)
                    {
                        c.add(f + ".params.delta_ticks", "must be non-zero");
                    }
                    if (p.task && !task_ids.contains(*p.task))
                    {
                        c.add(f + ".params.task", "unknown task '" + *p.task + "'");
                    }
                    break;
                case EventKind::NoEvent:
                    break;
                }
            }
        }
    }

    std::vector<Violation> validate_config(const SessionConfig &config)
    {
        Collector c;
        if (config.team_count < 1)
        {
            c.add("team_count", "must be >= 1");
        }
        if (config.team_size < 1 || config.team_size > 12)
        {
            c.add("team_size", "must be within 1..12");
        }
        if (config.sprint_length_days < 1)
        {
            c.add("sprint_length_days", "must be >= 1");
        }
        if (config.sprint_count < 1)
        {
            c.add("sprint_count", "must be >= 1");
        }
        if (config.nominal_per_day <= zero_ticks)
        {
            c.add("nominal_ticks_per_day", "must be > 0");
        }

        const auto &wheel = config.progress_wheel;
        if (wheel.slots.empty())
        {
            c.add("progress_wheel.slots", "must contain at least one slot");
        }
        for (std::size_t i = 0; i < wheel.slots.size(); ++i)
        {
            const auto &slot = wheel.slots[i];
            if (slot.weight < 1)
            {
                c.add(at("progress_wheel.slots", i) + ".weight", "must be >= 1");
            }
            if (slot.value < 0 || slot.value > Ticks::from_hours(24).count())
            {
                c.add(at("progress_wheel.slots", i) + ".value_ticks", "must be within 0..48 (0..24 hours)");
            }
        }

        const auto &pc = config.policy;
        if (pc.max_overtime_per_day < zero_ticks)
        {
            c.add("policy_constants.max_overtime_ticks_per_day", "must be >= 0");
        }
        if (!(pc.overtime_productivity > 0.0 && pc.overtime_productivity <= 1.0))
        {
            c.add("policy_constants.overtime_productivity", "must be within (0, 1]");
        }
        if (!(pc.overtime_cost_weight >= 1.0))
        {
            c.add("policy_constants.overtime_cost_weight", "must be >= 1");
        }
        if (pc.moscow.must < 0 || pc.moscow.should < 0 || pc.moscow.could < 0)
        {
            c.add("policy_constants.moscow_weights", "weights must be >= 0");
        }
        if (config.ideal_line.ceremony_per_member_day < zero_ticks)
        {
            c.add("ideal_line_policy.ceremony_ticks_per_member_day", "must be >= 0");
        }

        std::set<StoryId> story_ids;
        std::set<TaskId> task_ids;
        for (std::size_t i = 0; i < config.backlog.size(); ++i)
        {
            const auto &def = config.backlog[i];
            const auto f = at("backlog", i);
            if (def.id.empty())
            {
                c.add(f + ".id", "must not be empty");
            }
            else if (def.id == quality_story_id)
            {
                c.add(f + ".id", "'" + quality_story_id + "' is reserved for injected defects");
            }
            else if (!story_ids.insert(def.id).second)
            {
                c.add(f + ".id", "duplicate story id '" + def.id + "'");
            }
            if (def.points < 1)
            {
                c.add(f + ".points", "must be >= 1");
            }
            if (def.tasks.empty())
            {
                c.add(f + ".tasks", "story must have at least one task");
            }
            for (std::size_t k = 0; k < def.tasks.size(); ++k)
            {
                const auto &t = def.tasks[k];
                const auto tf = at(f + ".tasks", k);
                if (t.id.empty())
                {
                    c.add(tf + ".id", "must not be empty");
                }
                else if (!task_ids.insert(t.id).second)
                {
                    c.add(tf + ".id", "duplicate task id '" + t.id + "'");
                }
                if (t.estimate <= zero_ticks)
                {
                    c.add(tf + ".estimate_ticks", "must be > 0");
                }
                if (t.required_role && t.required_role->empty())
                {
                    c.add(tf + ".required_role", "must be a role name or null");
                }
            }
        }

        std::map<StoryId, Story> graph;
        for (std::size_t i = 0; i < config.backlog.size(); ++i)
        {
            const auto &def = config.backlog[i];
            Story s;
            s.id = def.id;
            s.order = static_cast<int>(i);
            for (const auto &dep : def.depends_on)
            {
                if (dep == def.id)
                {
                    c.add(at("backlog", i) + ".depends_on", "story '" + def.id + "' depends on itself");
                }
                else if (!story_ids.contains(dep))
                {
                    c.add(at("backlog", i) + ".depends_on", "unknown story '" + dep + "'");
                }
                s.depends_on.insert(dep);
            }
            graph.try_emplace(s.id, std::move(s));
        }
        if (!topological_order(graph))
        {
            c.add("backlog", "dependency cycle among stories");
        }

        if (!config.members.empty())
        {
            std::vector<int> indices;
            for (const auto &m : config.members)
            {
                indices.push_back(m.index);
                if (m.role.empty())
                {
                    c.add("members", "member " + std::to_string(m.index) + " has an empty role");
                }
            }
            std::sort(indices.begin(), indices.end());
            bool consecutive = static_cast<int>(indices.size()) == config.team_size;
            for (std::size_t i = 0; consecutive && i < indices.size(); ++i)
            {
                consecutive = indices[i] == static_cast<int>(i) + 1;
            }
            if (!consecutive)
            {
                c.add("members", "member indices must be exactly 1..team_size without gaps");
            }
        }

        check_deck(config, story_ids, task_ids, c);
        return std::move(c.out);
    }

    std::vector<std::string> config_warnings(const SessionConfig &config)
    {
        std::vector<std::string> out;
        if (config.sprint_length_days * config.sprint_count < 10)
        {
            out.push_back("fewer than ten simulated days in total");
        }
        if (config.team_size < 4 || config.team_size > 6)
        {
            out.push_back("team size outside the recommended 4..6");
        }
        std::set<RoleName> held;
        for (const auto &m : roster(config))
        {
            held.insert(m.role);
        }
        std::set<RoleName> missing;
        for (const auto &s : config.backlog)
        {
            for (const auto &t : s.tasks)
            {
                if (t.required_role && !held.contains(*t.required_role))
                {
                    missing.insert(*t.required_role);
                }
            }
        }
        for (const auto &role : missing)
        {
            out.push_back("no member holds required role '" + role + "'");
        }
        return out;
    }
}
