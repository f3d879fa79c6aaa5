#include "doctest.h"
#include "support.hpp"

#include "sprintsim/batch.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/plot.hpp"
#include "sprintsim/serialize.hpp"

#include <cmath>
#include <sstream>

using namespace sprintsim;
using namespace sprintsim::testing;

namespace
{
    std::vector<std::string> csv_lines(const std::string &text)
    {
        std::vector<std::string> out;
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);)
        {
            out.push_back(line);
        }
        return out;
    }

    std::size_t columns(const std::string &line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

    const std::vector<BotPolicy> all_policies = {
        {BotKind::GreedyValue, OvertimeRule::Never},      {BotKind::DependencyFirst, OvertimeRule::Never},
        {BotKind::SpecialistAware, OvertimeRule::Never},  {BotKind::Random, OvertimeRule::Never},
        {BotKind::GreedyValue, OvertimeRule::WhenBehindIdeal},
    };
}

TEST_CASE("policy names roundtrip")
{
    for (const auto &p : all_policies)
    {
        CHECK(parse_policy(policy_name(p)) == p);
    }
    CHECK(parse_policy("random+overtime") == BotPolicy{BotKind::Random, OvertimeRule::WhenBehindIdeal});
    CHECK_THROWS_AS(parse_policy("lazy"), SimError);
}

TEST_CASE("bot decisions are pure")
{
    const auto c = default_config();
    const auto s = init_session(c);
    for (const auto &p : all_policies)
    {
        const auto a = plan_commands(s.teams.at("T1"), c, p, bot_rng(7));
        const auto b = plan_commands(s.teams.at("T1"), c, p, bot_rng(7));
        CHECK(a.commands == b.commands);
        CHECK(a.rng == b.rng);
    }
}

TEST_CASE("greedy plan respects capacity and dependencies")
{
    const auto c = default_config();
    const auto s = init_session(c);
    for (const auto &p : all_policies)
    {
        const auto plan = plan_commands(s.teams.at("T1"), c, p, bot_rng(1));
        REQUIRE(plan.commands.size() == 1);
        const auto &commit = std::get<PlanCommit>(plan.commands[0]);
        CHECK_FALSE(commit.stories.empty());
        const auto team = plan_sprint(s.teams.at("T1"), commit.stories, context_of(s));
        CHECK(team.warnings.empty());
        CHECK(committed_remaining(team.team) <= sprint_capacity(c));
    }
}

TEST_CASE("daily bot closes the scrum and never breaks rules")
{
    std::mt19937_64 gen(21);
    for (int i = 0; i < 40; ++i)
    {
        const auto c = random_config(gen);
        const auto &p = all_policies[static_cast<std::size_t>(i) % all_policies.size()];
        // run_bot_session submits through the engine, so any illegal command would throw.
        const auto run = run_bot_session(c, p);
        CHECK(run.state.phase == Phase::Finished);
        for (const auto &[id, team] : run.state.teams)
        {
            CHECK(team.charged_overtime <= c.policy.max_overtime_per_day *
                                               (static_cast<std::int64_t>(c.team_size) * c.sprint_length_days * c.sprint_count));
        }
    }
}

TEST_CASE("specialist-aware bot keeps role hours within holder capacity")
{
    auto c = default_config();
    c.members = {{1, "A", "tester"}, {2, "B", generalist_role}, {3, "C", generalist_role}, {4, "D", generalist_role},
                 {5, "E", generalist_role}};
    for (auto &s : c.backlog)
    {
        s.tasks.front().required_role = "tester";
    }
    const auto s = init_session(c);
    const auto plan = plan_commands(s.teams.at("T1"), c, {BotKind::SpecialistAware, OvertimeRule::Never}, bot_rng(1));
    const auto team = plan_sprint(s.teams.at("T1"), std::get<PlanCommit>(plan.commands[0]).stories, context_of(s)).team;
    Ticks role_hours;
    for (const auto &[id, t] : team.tasks)
    {
        if (t.required_role && team.stories.at(t.story).status == StoryStatus::Committed)
        {
            role_hours += t.remaining;
        }
    }
    CHECK(role_hours <= c.nominal_per_day * c.sprint_length_days);
}

TEST_CASE("overtime rule elects overtime only when behind")
{
    auto c = small_config({story("A", 5, Priority::Must, std::vector<double>(20, 6))}, 2, 10);
    auto s = cmd(init_session(c), PlanCommit{{"A"}});
    const BotPolicy p{BotKind::GreedyValue, OvertimeRule::WhenBehindIdeal};
    auto count_ot = [](const BotDecision &d)
    {
        return std::count_if(d.commands.begin(), d.commands.end(), [](const Command &c)
                             { return std::holds_alternative<SetOvertime>(c) && std::get<SetOvertime>(c).hours > zero_ticks; });
    };
    // Committed 120h against a 120h ideal: day 1 is on the line.
    CHECK(count_ot(day_commands(s.teams.at("T1"), c, s.calendar, p, bot_rng(1))) == 0);
    s = advance_day_with(s, scripted(s, {0, 0})).state;
    s = advance_day_with(s, scripted(s, {0, 0})).state;
    // 120h left after two idle days, ideal 96h: behind by more than 12h.
    CHECK(count_ot(day_commands(s.teams.at("T1"), c, s.calendar, p, bot_rng(1))) == 2);
    CHECK(count_ot(day_commands(s.teams.at("T1"), c, s.calendar, BotPolicy{}, bot_rng(1))) == 0);
}

TEST_CASE("batch runs are deterministic")
{
    const auto c = default_config();
    const auto a = run_batch(c, BotPolicy{}, 1, 42, 1);
    const auto b = run_batch(c, BotPolicy{}, 1, 42, 1);
    CHECK(outcome_csv(a) == outcome_csv(b));
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].seed == 42);

    const auto serial = run_batch(c, {BotKind::Random, OvertimeRule::WhenBehindIdeal}, 40, 7, 1);
    const auto parallel = run_batch(c, {BotKind::Random, OvertimeRule::WhenBehindIdeal}, 40, 7, 8);
    CHECK(outcome_csv(serial) == outcome_csv(parallel));
    CHECK(aggregate_csv(serial) == aggregate_csv(parallel));
    for (std::size_t i = 0; i < serial.rows.size(); ++i)
    {
        CHECK(serial.rows[i].seed == 7 + i);
    }
}

TEST_CASE("batch row matches a single bot session")
{
    auto c = default_config();
    c.seed = 99;
    const auto row = summarize_run(run_bot_session(c, BotPolicy{}));
    const auto table = run_batch(c, BotPolicy{}, 1, 99, 1);
    CHECK(table.rows[0].value == row.value);
    CHECK(table.rows[0].cost_hours == row.cost_hours);
    CHECK(table.rows[0].completed == row.completed);
}

TEST_CASE("engine-direct bot run equals the live session run")
{
    std::mt19937_64 gen(8);
    for (int i = 0; i < 10; ++i)
    {
        const auto c = random_config(gen);
        const auto &p = all_policies[static_cast<std::size_t>(i) % all_policies.size()];
        LiveSession live(c, fixed_clock);
        play_with_bots(live, p);
        CHECK(canonical(run_bot_session(c, p).state) == canonical(live.state()));
    }
}

TEST_CASE("drawn hours per member-day match the wheel mean")
{
    // 2000 runs x 5 members x 10 days = 1e5 member-days.
    const auto table = run_batch(default_config(), BotPolicy{}, 2000, 1, 0);
    double drawn = 0;
    std::int64_t member_days = 0;
    for (const auto &r : table.rows)
    {
        drawn += r.drawn_hours;
        member_days += r.member_days;
    }
    REQUIRE(member_days == 100000);
    const auto wheel = build_wheel(default_progress_wheel());
    const double mean_h = wheel.stats().mean / 2.0;
    const double sd_h = wheel.stats().sd / 2.0;
    CHECK(std::abs(drawn / static_cast<double>(member_days) - mean_h) < 3 * sd_h / std::sqrt(static_cast<double>(member_days)));
}

TEST_CASE("aggregates")
{
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(quantile({1, 2, 3, 4}, 1.0) == 4.0);
    CHECK(quantile({10}, 0.9) == 10.0);
    const auto a = aggregate("x", {4, 1, 3, 2});
    CHECK(a.count == 4);
    CHECK(a.mean == 2.5);
    CHECK(a.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(a.min == 1.0);
    CHECK(a.max == 4.0);
    CHECK(a.p10 == doctest::Approx(1.3));
}

TEST_CASE("invalid batch config produces error rows")
{
    auto c = default_config();
    c.backlog[0].depends_on.push_back(c.backlog[0].id);
    const auto table = run_batch(c, BotPolicy{}, 3, 1, 1);
    CHECK(table.errors == 3);
    for (const auto &r : table.rows)
    {
        CHECK(r.error.has_value());
    }
    CHECK(outcome_csv(table).find("cycle") != std::string::npos);
    CHECK_THROWS_AS(run_batch(default_config(), BotPolicy{}, 0, 1, 1), SimError);
}

TEST_CASE("plot tables")
{
    auto c = default_config();
    auto s = init_session(c);
    s = cmd(s, PlanCommit{{"S1", "S2"}});
    auto rows = csv_lines(session_plot_data(s, "burndown"));
    CHECK(rows.size() == 2);
    CHECK(rows[0] == "day,remaining_hours");

    LiveSession live(c, fixed_clock);
    play_with_bots(live, BotPolicy{});
    rows = csv_lines(session_plot_data(live.state(), "ideal"));
    REQUIRE(rows.size() == 12);
    for (const auto &r : rows)
    {
        CHECK(columns(r) == 3);
    }
    rows = csv_lines(session_plot_data(live.state(), "leaderboard"));
    CHECK(rows.size() == 1 + static_cast<std::size_t>(c.team_count));

    const auto table = run_batch(c, BotPolicy{}, 50, 1, 0);
    rows = csv_lines(batch_plot_data(table, "histogram", "value", 10));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == "bin_low,bin_high,count");
    int total = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        total += std::stoi(rows[i].substr(rows[i].rfind(',') + 1));
    }
    CHECK(total == 50);

    CHECK_THROWS_AS(session_plot_data(s, "pie"), SimError);
    CHECK_THROWS_AS(batch_plot_data(table, "histogram", "nope", 10), SimError);
    CHECK_THROWS_AS(session_plot_data(s, "burndown", std::string("T9")), SimError);
}
