#pragma once

// Policy bots stand in for a team's planning and daily-meeting decisions.
// A bot is a pure function of the team board, the session constants and its
// own generator; it never reads the session's draw stream.

#include "sprintsim/chance.hpp"
#include "sprintsim/engine.hpp"

#include <string_view>
#include <vector>

namespace sprintsim
{
    enum class BotKind { GreedyValue, DependencyFirst, SpecialistAware, Random };
    enum class OvertimeRule { Never, WhenBehindIdeal };

    struct BotPolicy
    {
        BotKind kind = BotKind::GreedyValue;
        OvertimeRule overtime = OvertimeRule::Never;

        bool operator==(const BotPolicy &) const = default;
    };

    // "greedy-value", optionally suffixed "+overtime" for when-behind-ideal.
    BotPolicy parse_policy(std::string_view text);
    std::string policy_name(const BotPolicy &policy);

    struct BotDecision
    {
        std::vector<Command> commands;
        RngState rng;
    };

    // Bot generator for a session seed, independent of the draw stream.
    RngState bot_rng(std::uint64_t session_seed);

    // Sprint planning: one PlanCommit (possibly empty).
    BotDecision plan_commands(const TeamState &team, const SessionConfig &config, const BotPolicy &policy, RngState rng);

    // Daily scrum before the spin of `calendar`'s day: unassign work held by
    // absent members, fill every present member's queue, optionally elect
    // overtime, then CloseScrum.
    BotDecision day_commands(const TeamState &team, const SessionConfig &config, const Calendar &calendar,
                             const BotPolicy &policy, RngState rng);

    // The largest progress a member can make in one day with `overtime`.
    Ticks max_daily_progress(const SessionConfig &config, Ticks overtime);
}
