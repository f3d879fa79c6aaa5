#pragma once

// Canonical JSON for every document the simulator reads or writes. Objects
// use sorted keys and compact output, so equal states dump to equal bytes.
// All effort values are integer half-hour ticks on the wire.

#include "sprintsim/engine.hpp"
#include "sprintsim/model.hpp"

#include "json.hpp"

#include <string>
#include <string_view>

namespace sprintsim
{
    using nlohmann::json;

    NLOHMANN_JSON_SERIALIZE_ENUM(StoryKind, {{StoryKind::User, "User"}, {StoryKind::Technical, "Technical"}})
    NLOHMANN_JSON_SERIALIZE_ENUM(Priority, {{Priority::Must, "Must"}, {Priority::Should, "Should"}, {Priority::Could, "Could"}})
    NLOHMANN_JSON_SERIALIZE_ENUM(StoryStatus, {{StoryStatus::Backlog, "Backlog"}, {StoryStatus::Committed, "Committed"}, {StoryStatus::Done, "Done"}})
    NLOHMANN_JSON_SERIALIZE_ENUM(TaskStatus, {{TaskStatus::ToDo, "ToDo"}, {TaskStatus::InProgress, "InProgress"}, {TaskStatus::Done, "Done"}})
    NLOHMANN_JSON_SERIALIZE_ENUM(Origin, {{Origin::Planned, "Planned"}, {Origin::EventInjected, "EventInjected"}})
    NLOHMANN_JSON_SERIALIZE_ENUM(LogKind, {{LogKind::Decision, "Decision"}, {LogKind::Event, "Event"}, {LogKind::Progress, "Progress"}, {LogKind::Note, "Note"}})
    NLOHMANN_JSON_SERIALIZE_ENUM(Phase, {{Phase::Planning, "Planning"}, {Phase::InDay, "InDay"}, {Phase::DayClosed, "DayClosed"}, {Phase::SprintClosed, "SprintClosed"}, {Phase::Finished, "Finished"}})

    std::string_view to_string(EventKind kind);
    EventKind parse_event_kind(std::string_view text);

    void to_json(json &j, const Ticks &t);
    void from_json(const json &j, Ticks &t);

    void to_json(json &j, const WheelConfig &w);
    void from_json(const json &j, WheelConfig &w);
    void to_json(json &j, const EventCard &c);
    void from_json(const json &j, EventCard &c);
    void to_json(json &j, const PolicyConstants &p);
    void from_json(const json &j, PolicyConstants &p);
    void to_json(json &j, const IdealLinePolicy &p);
    void from_json(const json &j, IdealLinePolicy &p);
    void to_json(json &j, const StoryDef &s);
    void from_json(const json &j, StoryDef &s);
    void to_json(json &j, const MemberDef &m);
    void from_json(const json &j, MemberDef &m);
    void to_json(json &j, const SessionConfig &c);
    void from_json(const json &j, SessionConfig &c);

    void to_json(json &j, const Story &s);
    void from_json(const json &j, Story &s);
    void to_json(json &j, const Task &t);
    void from_json(const json &j, Task &t);
    void to_json(json &j, const Member &m);
    void from_json(const json &j, Member &m);
    void to_json(json &j, const LogEntry &e);
    void from_json(const json &j, LogEntry &e);
    void to_json(json &j, const TeamState &t);
    void from_json(const json &j, TeamState &t);

    void to_json(json &j, const RngState &r);
    void from_json(const json &j, RngState &r);
    void to_json(json &j, const DrawnEvent &e);
    void from_json(const json &j, DrawnEvent &e);
    void to_json(json &j, const DayDraws &d);
    void from_json(const json &j, DayDraws &d);

    void to_json(json &j, const Command &c);
    void from_json(const json &j, Command &c);

    void to_json(json &j, const Calendar &c);
    void from_json(const json &j, Calendar &c);
    void to_json(json &j, const SessionState &s);
    void from_json(const json &j, SessionState &s);

    void to_json(json &j, const Violation &v);

    void to_json(json &j, const EventOutcome &o);
    void to_json(json &j, const ProgressOutcome &o);
    void to_json(json &j, const TeamDayOutcome &o);

    // Compact, sorted-key dump.
    inline std::string canonical(const json &j) { return j.dump(); }
    std::string canonical(const SessionState &state);

    // Parses a config document; malformed documents throw SimError(Validation).
    SessionConfig parse_config(std::string_view text);
    Command parse_command(std::string_view text);
}
