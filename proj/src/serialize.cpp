#include "sprintsim/serialize.hpp"
#include "sprintsim/error.hpp"

namespace sprintsim
{
    namespace
    {
        template <typename T>
        void get_opt(const json &j, const char *key, T &out)
        {
            if (auto it = j.find(key); it != j.end() && !it->is_null())
            {
                out = it->template get<T>();
            }
        }

        template <typename T>
        void get_opt(const json &j, const char *key, std::optional<T> &out)
        {
            if (auto it = j.find(key); it != j.end() && !it->is_null())
            {
                out = it->template get<T>();
            }
            else
            {
                out.reset();
            }
        }

        template <typename T>
        json opt(const std::optional<T> &v)
        {
            return v ? json(*v) : json(nullptr);
        }

        const std::pair<EventKind, std::string_view> event_kind_names[] = {
            {EventKind::Defect, "Defect"},
            {EventKind::AddStory, "AddStory"},
            {EventKind::Absence, "Absence"},
            {EventKind::PriorityChange, "PriorityChange"},
            {EventKind::ScopeCut, "ScopeCut"},
            {EventKind::EstimateRevision, "EstimateRevision"},
            {EventKind::NoEvent, "NoEvent"},
        };
    }

    std::string_view to_string(EventKind kind)
    {
        for (const auto &[k, name] : event_kind_names)
        {
            if (k == kind)
            {
                return name;
            }
        }
        return "NoEvent";
    }

    EventKind parse_event_kind(std::string_view text)
    {
        for (const auto &[k, name] : event_kind_names)
        {
            if (name == text)
            {
                return k;
            }
        }
        throw SimError(ErrorCode::Validation, "unknown event kind '" + std::string(text) + "'");
    }

    void to_json(json &j, const Ticks &t) { j = t.count(); }
    void from_json(const json &j, Ticks &t) { t = Ticks{j.get<std::int64_t>()}; }

    void to_json(json &j, const WheelConfig &w)
    {
        json slots = json::array();
        for (const auto &s : w.slots)
        {
            slots.push_back({{"value", s.value}, {"weight", s.weight}});
        }
        j = {{"slots", std::move(slots)}};
    }

    void from_json(const json &j, WheelConfig &w)
    {
        w.slots.clear();
        for (const auto &s : j.at("slots"))
        {
            WheelSlot slot;
            slot.value = s.at("value").get<std::int64_t>();
            slot.weight = s.value("weight", std::int64_t{1});
            w.slots.push_back(slot);
        }
    }

    void to_json(json &j, const EventCard &c)
    {
        const auto &p = c.params;
        json params = json::object();
        switch (c.kind)
        {
        case EventKind::Defect:
            params["hours_ticks"] = p.hours;
            break;
        case EventKind::AddStory:
            params["points"] = p.points;
            params["priority"] = p.priority;
            params["story_kind"] = p.story_kind;
            params["task_ticks"] = p.task_estimates;
            break;
        case EventKind::Absence:
            params["duration_days"] = p.duration_days;
            params["member"] = opt(p.member);
            break;
        case EventKind::PriorityChange:
            params["story"] = opt(p.story);
            params["priority"] = p.priority;
            break;
        case EventKind::ScopeCut:
            params["story"] = opt(p.story);
            break;
        case EventKind::EstimateRevision:
            params["task"] = opt(p.task);
            params["delta_ticks"] = p.delta;
            break;
        case EventKind::NoEvent:
            break;
        }
        j = {{"id", c.id}, {"title", c.title}, {"kind", to_string(c.kind)}, {"weight", c.weight}, {"params", std::move(params)}};
    }

    void from_json(const json &j, EventCard &c)
    {
        c = EventCard{};
        c.id = j.at("id").get<std::string>();
        c.title = j.value("title", c.id);
        c.kind = parse_event_kind(j.at("kind").get<std::string>());
        c.weight = j.value("weight", std::int64_t{1});
        const json params = j.value("params", json::object());
        auto &p = c.params;
        get_opt(params, "hours_ticks", p.hours);
        get_opt(params, "points", p.points);
        get_opt(params, "priority", p.priority);
        get_opt(params, "story_kind", p.story_kind);
        get_opt(params, "task_ticks", p.task_estimates);
        get_opt(params, "duration_days", p.duration_days);
        get_opt(params, "member", p.member);
        get_opt(params, "story", p.story);
        get_opt(params, "task", p.task);
        get_opt(params, "delta_ticks", p.delta);
        if (c.kind == EventKind::AddStory && !params.contains("task_ticks"))
        {
            p.task_estimates = {Ticks::from_hours(8), Ticks::from_hours(8), Ticks::from_hours(4)};
        }
    }

    void to_json(json &j, const PolicyConstants &p)
    {
        j = {{"max_overtime_ticks_per_day", p.max_overtime_per_day},
             {"overtime_productivity", p.overtime_productivity},
             {"overtime_cost_weight", p.overtime_cost_weight},
             {"moscow_weights", {{"Must", p.moscow.must}, {"Should", p.moscow.should}, {"Could", p.moscow.could}}}};
    }

    void from_json(const json &j, PolicyConstants &p)
    {
        p = PolicyConstants{};
        get_opt(j, "max_overtime_ticks_per_day", p.max_overtime_per_day);
        get_opt(j, "overtime_productivity", p.overtime_productivity);
        get_opt(j, "overtime_cost_weight", p.overtime_cost_weight);
        if (auto it = j.find("moscow_weights"); it != j.end())
        {
            get_opt(*it, "Must", p.moscow.must);
            get_opt(*it, "Should", p.moscow.should);
            get_opt(*it, "Could", p.moscow.could);
        }
    }

    void to_json(json &j, const IdealLinePolicy &p)
    {
        j = {{"include_technical_stories", p.include_technical_stories},
             {"include_ceremony_hours", p.include_ceremony_hours},
             {"ceremony_ticks_per_member_day", p.ceremony_per_member_day}};
    }

    void from_json(const json &j, IdealLinePolicy &p)
    {
        p = IdealLinePolicy{};
        get_opt(j, "include_technical_stories", p.include_technical_stories);
        get_opt(j, "include_ceremony_hours", p.include_ceremony_hours);
        get_opt(j, "ceremony_ticks_per_member_day", p.ceremony_per_member_day);
    }

    void to_json(json &j, const StoryDef &s)
    {
        json tasks = json::array();
        for (const auto &t : s.tasks)
        {
            tasks.push_back({{"id", t.id}, {"estimate_ticks", t.estimate}, {"required_role", opt(t.required_role)}});
        }
        j = {{"id", s.id}, {"title", s.title}, {"kind", s.kind}, {"points", s.points},
             {"priority", s.priority}, {"depends_on", s.depends_on}, {"tasks", std::move(tasks)}};
    }

    void from_json(const json &j, StoryDef &s)
    {
        s = StoryDef{};
        s.id = j.at("id").get<std::string>();
        s.title = j.value("title", s.id);
        get_opt(j, "kind", s.kind);
        get_opt(j, "points", s.points);
        get_opt(j, "priority", s.priority);
        get_opt(j, "depends_on", s.depends_on);
        for (const auto &t : j.value("tasks", json::array()))
        {
            TaskDef def;
            def.id = t.at("id").get<std::string>();
            def.estimate = t.at("estimate_ticks").get<Ticks>();
            get_opt(t, "required_role", def.required_role);
            s.tasks.push_back(std::move(def));
        }
    }

    void to_json(json &j, const MemberDef &m) { j = {{"index", m.index}, {"name", m.name}, {"role", m.role}}; }

    void from_json(const json &j, MemberDef &m)
    {
        m = MemberDef{};
        m.index = j.at("index").get<int>();
        get_opt(j, "name", m.name);
        get_opt(j, "role", m.role);
    }

    void to_json(json &j, const SessionConfig &c)
    {
        j = {{"team_count", c.team_count},
             {"team_size", c.team_size},
             {"sprint_length_days", c.sprint_length_days},
             {"sprint_count", c.sprint_count},
             {"nominal_ticks_per_day", c.nominal_per_day},
             {"progress_wheel", c.progress_wheel},
             {"event_deck", c.event_deck},
             {"policy_constants", c.policy},
             {"ideal_line_policy", c.ideal_line},
             {"backlog", c.backlog},
             {"members", c.members},
             {"seed", c.seed}};
    }

    void from_json(const json &j, SessionConfig &c)
    {
        c = SessionConfig{};
        get_opt(j, "team_count", c.team_count);
        get_opt(j, "team_size", c.team_size);
        get_opt(j, "sprint_length_days", c.sprint_length_days);
        get_opt(j, "sprint_count", c.sprint_count);
        get_opt(j, "nominal_ticks_per_day", c.nominal_per_day);
        get_opt(j, "progress_wheel", c.progress_wheel);
        get_opt(j, "event_deck", c.event_deck);
        get_opt(j, "policy_constants", c.policy);
        get_opt(j, "ideal_line_policy", c.ideal_line);
        get_opt(j, "backlog", c.backlog);
        get_opt(j, "members", c.members);
        get_opt(j, "seed", c.seed);
    }

    void to_json(json &j, const Story &s)
    {
        j = {{"id", s.id}, {"title", s.title}, {"kind", s.kind}, {"points", s.points},
             {"priority", s.priority}, {"depends_on", s.depends_on}, {"status", s.status},
             {"origin", s.origin}, {"order", s.order}, {"tasks", s.tasks}};
    }

    void from_json(const json &j, Story &s)
    {
        s.id = j.at("id").get<std::string>();
        s.title = j.at("title").get<std::string>();
        s.kind = j.at("kind").get<StoryKind>();
        s.points = j.at("points").get<int>();
        s.priority = j.at("priority").get<Priority>();
        s.depends_on = j.at("depends_on").get<std::set<StoryId>>();
        s.status = j.at("status").get<StoryStatus>();
        s.origin = j.at("origin").get<Origin>();
        s.order = j.at("order").get<int>();
        s.tasks = j.at("tasks").get<std::vector<TaskId>>();
    }

    void to_json(json &j, const Task &t)
    {
        j = {{"id", t.id}, {"story", t.story}, {"estimate_ticks", t.estimate}, {"remaining_ticks", t.remaining},
             {"required_role", opt(t.required_role)}, {"status", t.status}, {"origin", t.origin},
             {"completed_day", opt(t.completed_day)}};
    }

    void from_json(const json &j, Task &t)
    {
        t.id = j.at("id").get<std::string>();
        t.story = j.at("story").get<std::string>();
        t.estimate = j.at("estimate_ticks").get<Ticks>();
        t.remaining = j.at("remaining_ticks").get<Ticks>();
        get_opt(j, "required_role", t.required_role);
        t.status = j.at("status").get<TaskStatus>();
        t.origin = j.at("origin").get<Origin>();
        get_opt(j, "completed_day", t.completed_day);
    }

    void to_json(json &j, const Member &m)
    {
        j = {{"index", m.index}, {"name", m.name}, {"role", m.role}, {"absent_from", opt(m.absent_from)},
             {"absent_until", opt(m.absent_until)}, {"overtime_ticks_today", m.overtime_today}};
    }

    void from_json(const json &j, Member &m)
    {
        m.index = j.at("index").get<int>();
        m.name = j.at("name").get<std::string>();
        m.role = j.at("role").get<std::string>();
        get_opt(j, "absent_from", m.absent_from);
        get_opt(j, "absent_until", m.absent_until);
        m.overtime_today = j.at("overtime_ticks_today").get<Ticks>();
    }

    void to_json(json &j, const LogEntry &e)
    {
        j = {{"seq", e.seq}, {"day", e.day}, {"author", e.author}, {"kind", e.kind}, {"text", e.text}, {"payload", e.payload}};
    }

    void from_json(const json &j, LogEntry &e)
    {
        e.seq = j.at("seq").get<std::int64_t>();
        e.day = j.at("day").get<int>();
        e.author = j.at("author").get<std::string>();
        e.kind = j.at("kind").get<LogKind>();
        e.text = j.at("text").get<std::string>();
        e.payload = j.at("payload");
    }

    void to_json(json &j, const TeamState &t)
    {
        json assignments = json::object();
        for (const auto &[m, list] : t.assignments)
        {
            assignments[std::to_string(m)] = list;
        }
        json burndown = json::array();
        for (const auto &p : t.burndown_actual)
        {
            burndown.push_back({{"sprint", p.sprint}, {"sprint_day", p.sprint_day}, {"remaining_ticks", p.remaining}});
        }
        json release = json::array();
        for (const auto &p : t.release_history)
        {
            release.push_back({{"boundary", p.boundary}, {"user_points", p.user_points}, {"technical_points", p.technical_points}});
        }
        j = {{"id", t.id},
             {"members", t.members},
             {"stories", t.stories},
             {"tasks", t.tasks},
             {"assignments", std::move(assignments)},
             {"charged_regular_ticks", t.charged_regular},
             {"charged_overtime_ticks", t.charged_overtime},
             {"committed_value", t.committed_value},
             {"decision_log", t.decision_log},
             {"burndown_origin_ticks", t.burndown_origin},
             {"burndown_actual", std::move(burndown)},
             {"release_history", std::move(release)},
             {"drawn_ticks", t.drawn_total},
             {"idle_ticks", t.idle_total},
             {"scrum_closed", t.scrum_closed},
             {"next_log_seq", t.next_log_seq}};
    }

    void from_json(const json &j, TeamState &t)
    {
        t = TeamState{};
        t.id = j.at("id").get<std::string>();
        t.members = j.at("members").get<std::vector<Member>>();
        t.stories = j.at("stories").get<std::map<StoryId, Story>>();
        t.tasks = j.at("tasks").get<std::map<TaskId, Task>>();
        for (const auto &[k, v] : j.at("assignments").items())
        {
            t.assignments[std::stoi(k)] = v.get<std::vector<TaskId>>();
        }
        t.charged_regular = j.at("charged_regular_ticks").get<Ticks>();
        t.charged_overtime = j.at("charged_overtime_ticks").get<Ticks>();
        t.committed_value = j.at("committed_value").get<std::int64_t>();
        t.decision_log = j.at("decision_log").get<std::vector<LogEntry>>();
        t.burndown_origin = j.at("burndown_origin_ticks").get<std::vector<Ticks>>();
        for (const auto &p : j.at("burndown_actual"))
        {
            t.burndown_actual.push_back({p.at("sprint").get<int>(), p.at("sprint_day").get<int>(), p.at("remaining_ticks").get<Ticks>()});
        }
        for (const auto &p : j.at("release_history"))
        {
            t.release_history.push_back({p.at("boundary").get<int>(), p.at("user_points").get<int>(), p.at("technical_points").get<int>()});
        }
        t.drawn_total = j.at("drawn_ticks").get<Ticks>();
        t.idle_total = j.at("idle_ticks").get<Ticks>();
        t.scrum_closed = j.at("scrum_closed").get<bool>();
        t.next_log_seq = j.at("next_log_seq").get<std::int64_t>();
    }

    void to_json(json &j, const RngState &r)
    {
        j = {{"seed", r.seed},
             {"counter_hi", static_cast<std::uint64_t>(r.counter >> 64)},
             {"counter_lo", static_cast<std::uint64_t>(r.counter)}};
    }

    void from_json(const json &j, RngState &r)
    {
        r.seed = j.at("seed").get<std::uint64_t>();
        const auto hi = j.at("counter_hi").get<std::uint64_t>();
        const auto lo = j.at("counter_lo").get<std::uint64_t>();
        r.counter = (static_cast<unsigned __int128>(hi) << 64) | lo;
    }

    void to_json(json &j, const DrawnEvent &e)
    {
        j = {{"card_index", e.card_index}, {"card_id", e.card_id}, {"member", opt(e.member)}, {"picks", e.picks}};
    }

    void from_json(const json &j, DrawnEvent &e)
    {
        e.card_index = j.at("card_index").get<std::size_t>();
        e.card_id = j.at("card_id").get<std::string>();
        get_opt(j, "member", e.member);
        e.picks = j.value("picks", std::vector<std::uint64_t>{});
    }

    void to_json(json &j, const DayDraws &d)
    {
        json progress = json::object();
        for (const auto &[m, v] : d.progress)
        {
            progress[std::to_string(m)] = v;
        }
        j = {{"day", d.day}, {"sprint_day", d.sprint_day}, {"event", opt(d.event)},
             {"progress_ticks", std::move(progress)}, {"rng_steps", d.rng_steps}};
    }

    void from_json(const json &j, DayDraws &d)
    {
        d = DayDraws{};
        d.day = j.at("day").get<int>();
        d.sprint_day = j.at("sprint_day").get<int>();
        get_opt(j, "event", d.event);
        for (const auto &[k, v] : j.at("progress_ticks").items())
        {
            d.progress[std::stoi(k)] = v.get<Ticks>();
        }
        d.rng_steps = j.at("rng_steps").get<std::uint64_t>();
    }

    void to_json(json &j, const Command &c)
    {
        j = std::visit(
            [](const auto &cmd) -> json
            {
                using T = std::decay_t<decltype(cmd)>;
                if constexpr (std::is_same_v<T, PlanCommit>)
                {
                    return {{"type", "PlanCommit"}, {"stories", cmd.stories}};
                }
                else if constexpr (std::is_same_v<T, AssignTask>)
                {
                    return {{"type", "AssignTask"}, {"member", cmd.member}, {"task", cmd.task}, {"position", opt(cmd.position)}};
                }
                else if constexpr (std::is_same_v<T, UnassignTask>)
                {
                    return {{"type", "UnassignTask"}, {"member", cmd.member}, {"task", cmd.task}};
                }
                else if constexpr (std::is_same_v<T, SetOvertime>)
                {
                    return {{"type", "SetOvertime"}, {"member", cmd.member}, {"hours_ticks", cmd.hours}};
                }
                else if constexpr (std::is_same_v<T, DropStory>)
                {
                    return {{"type", "DropStory"}, {"story", cmd.story}};
                }
                else if constexpr (std::is_same_v<T, LogNote>)
                {
                    return {{"type", "LogNote"}, {"text", cmd.text}, {"author", opt(cmd.author)}};
                }
                else if constexpr (std::is_same_v<T, FacilitatorNote>)
                {
                    return {{"type", "FacilitatorNote"}, {"text", cmd.text}};
                }
                else
                {
                    return {{"type", "CloseScrum"}};
                }
            },
            c);
    }

    void from_json(const json &j, Command &c)
    {
        const auto type = j.at("type").get<std::string>();
        if (type == "PlanCommit")
        {
            c = PlanCommit{j.at("stories").get<std::vector<StoryId>>()};
        }
        else if (type == "AssignTask")
        {
            AssignTask a;
            a.member = j.at("member").get<int>();
            a.task = j.at("task").get<std::string>();
            get_opt(j, "position", a.position);
            c = a;
        }
        else if (type == "UnassignTask")
        {
            c = UnassignTask{j.at("member").get<int>(), j.at("task").get<std::string>()};
        }
        else if (type == "SetOvertime")
        {
            c = SetOvertime{j.at("member").get<int>(), j.at("hours_ticks").get<Ticks>()};
        }
        else if (type == "DropStory")
        {
            c = DropStory{j.at("story").get<std::string>()};
        }
        else if (type == "LogNote")
        {
            LogNote n;
            n.text = j.at("text").get<std::string>();
            get_opt(j, "author", n.author);
            c = n;
        }
        else if (type == "FacilitatorNote")
        {
            c = FacilitatorNote{j.at("text").get<std::string>()};
        }
        else if (type == "CloseScrum")
        {
            c = CloseScrum{};
        }
        else
        {
            throw SimError(ErrorCode::Validation, "unknown command type '" + type + "'");
        }
    }

    void to_json(json &j, const Calendar &c)
    {
        j = {{"sprint", c.sprint_index}, {"sprint_day", c.sprint_day}, {"day", c.absolute_day}};
    }

    void from_json(const json &j, Calendar &c)
    {
        c.sprint_index = j.at("sprint").get<int>();
        c.sprint_day = j.at("sprint_day").get<int>();
        c.absolute_day = j.at("day").get<int>();
    }

    void to_json(json &j, const SessionState &s)
    {
        j = {{"config", s.config}, {"calendar", s.calendar}, {"teams", s.teams},
             {"rng", s.rng}, {"draw_history", s.draw_history}, {"phase", s.phase}};
    }

    void from_json(const json &j, SessionState &s)
    {
        s.config = j.at("config").get<SessionConfig>();
        s.calendar = j.at("calendar").get<Calendar>();
        s.teams = j.at("teams").get<std::map<TeamId, TeamState>>();
        s.rng = j.at("rng").get<RngState>();
        s.draw_history = j.at("draw_history").get<std::vector<DayDraws>>();
        s.phase = j.at("phase").get<Phase>();
    }

    void to_json(json &j, const Violation &v) { j = {{"field", v.field}, {"rule", v.rule}}; }

    void to_json(json &j, const EventOutcome &o)
    {
        j = {{"scope_delta_ticks", o.scope_delta}, {"fizzled", o.fizzled}, {"effect", o.effect}};
    }

    void to_json(json &j, const ProgressOutcome &o)
    {
        j = {{"member", o.member},         {"absent", o.absent},   {"drawn_ticks", o.drawn},
             {"effective_ticks", o.effective}, {"applied_ticks", o.applied}, {"idle_ticks", o.idle},
             {"completed", o.completed}};
    }

    void to_json(json &j, const TeamDayOutcome &o)
    {
        j = {{"remaining_before_ticks", o.remaining_before},
             {"event_added_ticks", o.event_added},
             {"effective_ticks", o.effective},
             {"applied_ticks", o.applied},
             {"idle_ticks", o.idle},
             {"remaining_after_ticks", o.remaining_after},
             {"event", o.event ? json(*o.event) : json(nullptr)},
             {"members", o.members}};
    }

    std::string canonical(const SessionState &state) { return json(state).dump(); }

    SessionConfig parse_config(std::string_view text)
    {
        try
        {
            return json::parse(text).get<SessionConfig>();
        }
        catch (const json::exception &e)
        {
            throw SimError(ErrorCode::Validation, std::string("malformed config document: ") + e.what());
        }
    }

    Command parse_command(std::string_view text)
    {
        try
        {
            return json::parse(text).get<Command>();
        }
        catch (const json::exception &e)
        {
            throw SimError(ErrorCode::Validation, std::string("malformed command: ") + e.what());
        }
    }
}
