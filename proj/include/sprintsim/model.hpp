#pragma once

// Domain types shared by the engine, metrics, session service and tools.
// Everything here is a plain value type; behaviour lives in the engine.

#include "json.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sprintsim
{
    // Effort is counted in integer half-hour ticks so that every sum is exact
    // and a replayed session is byte-identical to the live one.
    class Ticks
    {
    public:
        constexpr Ticks() = default;
        constexpr explicit Ticks(std::int64_t count) : m_count(count) {}

        static constexpr Ticks from_hours(std::int64_t hours) { return Ticks{2 * hours}; }

        constexpr std::int64_t count() const { return m_count; }
        constexpr double hours() const { return static_cast<double>(m_count) / 2.0; }

        constexpr Ticks &operator+=(Ticks o) { m_count += o.m_count; return *this; }
        constexpr Ticks &operator-=(Ticks o) { m_count -= o.m_count; return *this; }
        friend constexpr Ticks operator+(Ticks a, Ticks b) { return Ticks{a.m_count + b.m_count}; }
        friend constexpr Ticks operator-(Ticks a, Ticks b) { return Ticks{a.m_count - b.m_count}; }
        friend constexpr Ticks operator*(Ticks a, std::int64_t k) { return Ticks{a.m_count * k}; }
        friend constexpr Ticks operator*(std::int64_t k, Ticks a) { return Ticks{a.m_count * k}; }
        friend constexpr auto operator<=>(Ticks, Ticks) = default;

    private:
        std::int64_t m_count = 0;
    };

    inline constexpr Ticks zero_ticks{};

    using StoryId = std::string;
    using TaskId = std::string;
    using TeamId = std::string;
    using SessionId = std::string;
    using RoleName = std::string;

    // Members are numbered 1..team_size; the number binds a member to the
    // progress draw with the same index in every team.
    using MemberIndex = int;

    inline const RoleName generalist_role = "generalist";

    enum class StoryKind { User, Technical };
    enum class Priority { Must, Should, Could };
    enum class StoryStatus { Backlog, Committed, Done };
    enum class TaskStatus { ToDo, InProgress, Done };
    enum class Origin { Planned, EventInjected };
    enum class LogKind { Decision, Event, Progress, Note };

    // Synthetic technical story that owns injected defect tasks.
    inline const StoryId quality_story_id = "QUALITY";

    struct Story
    {
        StoryId id;
        std::string title;
        StoryKind kind = StoryKind::User;
        int points = 1;
        Priority priority = Priority::Should;
        std::set<StoryId> depends_on;
        StoryStatus status = StoryStatus::Backlog;
        Origin origin = Origin::Planned;
        // Backlog position; breaks ties wherever an ordering is needed.
        int order = 0;
        // Tasks in the order they were defined (FIFO within the story).
        std::vector<TaskId> tasks;

        bool operator==(const Story &) const = default;
    };

    struct Task
    {
        TaskId id;
        StoryId story;
        Ticks estimate;
        Ticks remaining;
        std::optional<RoleName> required_role;
        TaskStatus status = TaskStatus::ToDo;
        Origin origin = Origin::Planned;
        // Absolute day on which remaining reached zero.
        std::optional<int> completed_day;

        bool operator==(const Task &) const = default;
    };

    struct Member
    {
        MemberIndex index = 1;
        std::string name;
        RoleName role = generalist_role;
        // Absence window, inclusive on both ends (absolute days).
        std::optional<int> absent_from;
        std::optional<int> absent_until;
        Ticks overtime_today;

        bool absent_on(int day) const
        {
            return absent_from && absent_until && day >= *absent_from && day <= *absent_until;
        }

        bool operator==(const Member &) const = default;
    };

    struct LogEntry
    {
        std::int64_t seq = 0;
        int day = 0;
        // Member index as text, "facilitator" or "engine".
        std::string author;
        LogKind kind = LogKind::Note;
        std::string text;
        nlohmann::json payload;

        bool operator==(const LogEntry &) const = default;
    };

    struct BurndownPoint
    {
        int sprint = 1;
        int sprint_day = 0;
        Ticks remaining;

        bool operator==(const BurndownPoint &) const = default;
    };

    // Remaining story points at a sprint boundary (index 0 = before sprint 1).
    struct ReleasePoint
    {
        int boundary = 0;
        int user_points = 0;
        int technical_points = 0;

        bool operator==(const ReleasePoint &) const = default;
    };

    struct TeamState
    {
        TeamId id;
        std::vector<Member> members;
        std::map<StoryId, Story> stories;
        std::map<TaskId, Task> tasks;
        std::map<MemberIndex, std::vector<TaskId>> assignments;
        Ticks charged_regular;
        Ticks charged_overtime;
        // Value promised at sprint planning (cumulative over sprints,
        // including stories already accepted).
        std::int64_t committed_value = 0;
        std::vector<LogEntry> decision_log;
        // Committed scope at the start of each sprint, index = sprint - 1.
        std::vector<Ticks> burndown_origin;
        std::vector<BurndownPoint> burndown_actual;
        std::vector<ReleasePoint> release_history;
        Ticks drawn_total;
        Ticks idle_total;
        // Set by CloseScrum, cleared whenever a day advances.
        bool scrum_closed = false;
        std::int64_t next_log_seq = 1;

        const Member &member(MemberIndex index) const;
        Member &member(MemberIndex index);
        bool has_member(MemberIndex index) const;

        bool operator==(const TeamState &) const = default;
    };

    struct MoscowWeights
    {
        int must = 3;
        int should = 2;
        int could = 1;

        int weight(Priority p) const
        {
            switch (p)
            {
            case Priority::Must: return must;
            case Priority::Should: return should;
            case Priority::Could: return could;
            }
            return 0;
        }

        bool operator==(const MoscowWeights &) const = default;
    };

    struct PolicyConstants
    {
        Ticks max_overtime_per_day = Ticks::from_hours(2);
        // Marginal productivity of an overtime hour relative to a regular one.
        double overtime_productivity = 0.75;
        // Pay weight of an overtime hour relative to a regular one.
        double overtime_cost_weight = 1.5;
        MoscowWeights moscow;

        bool operator==(const PolicyConstants &) const = default;
    };

    struct IdealLinePolicy
    {
        bool include_technical_stories = true;
        bool include_ceremony_hours = false;
        Ticks ceremony_per_member_day = Ticks{1};

        bool operator==(const IdealLinePolicy &) const = default;
    };

    struct WheelSlot
    {
        // Progress ticks for a progress wheel, deck position for an event wheel.
        std::int64_t value = 0;
        std::int64_t weight = 1;

        bool operator==(const WheelSlot &) const = default;
    };

    struct WheelConfig
    {
        std::vector<WheelSlot> slots;

        bool operator==(const WheelConfig &) const = default;
    };

    enum class EventKind { Defect, AddStory, Absence, PriorityChange, ScopeCut, EstimateRevision, NoEvent };

    // Kind-specific parameters; only the fields relevant to the card's kind
    // are meaningful (and serialized).
    struct EventParams
    {
        // Defect: hours of the injected task.
        Ticks hours = Ticks::from_hours(6);
        // AddStory
        int points = 10;
        Priority priority = Priority::Should;
        StoryKind story_kind = StoryKind::User;
        std::vector<Ticks> task_estimates;
        // Absence
        int duration_days = 3;
        // Absence: fixed member, or drawn from the shared stream when empty.
        std::optional<MemberIndex> member;
        // PriorityChange / ScopeCut / EstimateRevision: fixed target, or drawn.
        std::optional<StoryId> story;
        std::optional<TaskId> task;
        // EstimateRevision: signed change of the remaining effort.
        Ticks delta = Ticks::from_hours(4);

        bool operator==(const EventParams &) const = default;
    };

    struct EventCard
    {
        std::string id;
        std::string title;
        EventKind kind = EventKind::NoEvent;
        std::int64_t weight = 1;
        EventParams params;

        bool operator==(const EventCard &) const = default;
    };

    struct TaskDef
    {
        TaskId id;
        Ticks estimate;
        std::optional<RoleName> required_role;

        bool operator==(const TaskDef &) const = default;
    };

    struct StoryDef
    {
        StoryId id;
        std::string title;
        StoryKind kind = StoryKind::User;
        int points = 1;
        Priority priority = Priority::Should;
        std::vector<StoryId> depends_on;
        std::vector<TaskDef> tasks;

        bool operator==(const StoryDef &) const = default;
    };

    struct MemberDef
    {
        MemberIndex index = 1;
        std::string name;
        RoleName role = generalist_role;

        bool operator==(const MemberDef &) const = default;
    };

    struct SessionConfig
    {
        int team_count = 1;
        int team_size = 5;
        int sprint_length_days = 10;
        int sprint_count = 1;
        Ticks nominal_per_day = Ticks::from_hours(6);
        WheelConfig progress_wheel;
        std::vector<EventCard> event_deck;
        PolicyConstants policy;
        IdealLinePolicy ideal_line;
        std::vector<StoryDef> backlog;
        // Optional explicit roster; generalists named "Member i" otherwise.
        std::vector<MemberDef> members;
        std::uint64_t seed = 1;

        bool operator==(const SessionConfig &) const = default;
    };

    struct Violation
    {
        std::string field;
        std::string rule;

        bool operator==(const Violation &) const = default;
    };

    // Every broken invariant of the configuration; empty means valid.
    std::vector<Violation> validate_config(const SessionConfig &config);

    // Soft findings that do not block a session (e.g. fewer than ten days).
    std::vector<std::string> config_warnings(const SessionConfig &config);

    // Stories in an order where every dependency precedes its dependents.
    // Returns nullopt when the graph has a cycle.
    std::optional<std::vector<StoryId>> topological_order(const std::map<StoryId, Story> &stories);

    // Roster for a team: explicit members if configured, generalists otherwise.
    std::vector<Member> roster(const SessionConfig &config);

    // Whether a member may work on a task under the specialist rule.
    bool role_allows(const Member &member, const Task &task);
}
