#pragma once

// The sprint state machine. Every operation takes a state by value and
// returns the successor; nothing here holds hidden mutable state.

#include "sprintsim/chance.hpp"
#include "sprintsim/model.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sprintsim
{
    enum class Phase { Planning, InDay, DayClosed, SprintClosed, Finished };

    struct Calendar
    {
        int sprint_index = 1;
        int sprint_day = 1;
        int absolute_day = 1;

        bool operator==(const Calendar &) const = default;
    };

    struct PlanCommit
    {
        std::vector<StoryId> stories;
        bool operator==(const PlanCommit &) const = default;
    };

    struct AssignTask
    {
        MemberIndex member = 1;
        TaskId task;
        // Insertion point in the member's queue; appended when absent.
        std::optional<std::size_t> position;
        bool operator==(const AssignTask &) const = default;
    };

    struct UnassignTask
    {
        MemberIndex member = 1;
        TaskId task;
        bool operator==(const UnassignTask &) const = default;
    };

    struct SetOvertime
    {
        MemberIndex member = 1;
        Ticks hours;
        bool operator==(const SetOvertime &) const = default;
    };

    struct DropStory
    {
        StoryId story;
        bool operator==(const DropStory &) const = default;
    };

    struct LogNote
    {
        std::string text;
        std::optional<MemberIndex> author;
        bool operator==(const LogNote &) const = default;
    };

    struct FacilitatorNote
    {
        std::string text;
        bool operator==(const FacilitatorNote &) const = default;
    };

    // The team declares its daily scrum finished; opens the facilitator gate.
    struct CloseScrum
    {
        bool operator==(const CloseScrum &) const = default;
    };

    using Command = std::variant<PlanCommit, AssignTask, UnassignTask, SetOvertime, DropStory, LogNote,
                                 FacilitatorNote, CloseScrum>;

    std::string_view command_name(const Command &command);

    struct SessionState
    {
        SessionConfig config;
        Calendar calendar;
        std::map<TeamId, TeamState> teams;
        RngState rng;
        std::vector<DayDraws> draw_history;
        Phase phase = Phase::Planning;

        bool operator==(const SessionState &) const = default;
    };

    struct CommandContext
    {
        Phase phase = Phase::Planning;
        Calendar calendar;
        const SessionConfig *config = nullptr;
    };

    CommandContext context_of(const SessionState &session);

    // Task hours still open on stories currently committed.
    Ticks committed_remaining(const TeamState &team);

    // Team capacity of one sprint at nominal hours.
    Ticks sprint_capacity(const SessionConfig &config);

    // Throws SimError(Validation) listing every violation.
    SessionState init_session(const SessionConfig &config);

    struct PlanResult
    {
        TeamState team;
        std::vector<std::string> warnings;
    };

    PlanResult plan_sprint(TeamState team, const std::vector<StoryId> &story_ids, const CommandContext &ctx);

    TeamState submit_command(TeamState team, const Command &command, const CommandContext &ctx);

    // Session-level entry point: phase gate, then the team's transition.
    SessionState submit(SessionState session, const TeamId &team, const Command &command);

    struct EventOutcome
    {
        // Signed change of committed remaining hours caused by the event.
        Ticks scope_delta;
        bool fizzled = false;
        std::string effect;
    };

    std::pair<TeamState, EventOutcome> apply_event(TeamState team, const EventCard &card, const DrawnEvent &drawn,
                                                   const CommandContext &ctx);

    // drawn * (1 + productivity * overtime / nominal), floored to whole ticks.
    Ticks effective_progress(Ticks drawn, Ticks overtime, Ticks nominal, double overtime_productivity);

    struct ProgressOutcome
    {
        MemberIndex member = 1;
        bool absent = false;
        Ticks drawn;
        Ticks effective;
        Ticks applied;
        Ticks idle;
        std::vector<TaskId> completed;
    };

    std::pair<TeamState, ProgressOutcome> apply_progress(TeamState team, MemberIndex member, Ticks drawn,
                                                         const CommandContext &ctx);

    struct TeamDayOutcome
    {
        Ticks remaining_before;
        Ticks event_added;
        Ticks effective;
        Ticks applied;
        Ticks idle;
        Ticks remaining_after;
        std::optional<EventOutcome> event;
        std::vector<ProgressOutcome> members;
    };

    struct AdvanceResult
    {
        SessionState state;
        DayDraws draws;
        std::map<TeamId, TeamDayOutcome> outcomes;
    };

    // Draws the day from the session stream and applies it to every team.
    AdvanceResult advance_day(SessionState session);

    // Applies an already-drawn bundle (the replay path); the generator only
    // moves forward by the bundle's recorded step count.
    AdvanceResult advance_day_with(SessionState session, DayDraws draws);

    SessionState close_sprint(SessionState session);

    struct ReplayCommand
    {
        TeamId team;
        Command command;
    };

    struct ReplayDraws
    {
        DayDraws draws;
    };

    struct ReplayCloseSprint
    {
    };

    struct ReplayStep
    {
        std::int64_t seq = 0;
        std::variant<ReplayCommand, ReplayDraws, ReplayCloseSprint> action;
    };

    SessionState apply_step(SessionState session, const ReplayStep &step);

    // Rebuilds the state from logged commands and draws; never touches the
    // generator. Throws SimError(Integrity) on out-of-order or inconsistent steps.
    SessionState replay(const SessionConfig &config, std::span<const ReplayStep> steps);
}
