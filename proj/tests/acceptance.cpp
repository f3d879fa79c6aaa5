// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "support.hpp"

#include "sprintsim/batch.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/journal.hpp"
#include "sprintsim/metrics.hpp"
#include "sprintsim/serialize.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace sprintsim;
using namespace sprintsim::testing;

namespace
{
    struct Verdict
    {
        bool pass = false;
        std::string detail;
    };

    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point t0)
    {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    std::string fmt(double v, int precision = 4)
    {
        std::ostringstream os;
        os.precision(precision);
        os << std::fixed << v;
        return os.str();
    }

    // 1. Exact moments of the default progress wheel.
    Verdict wheel_calibration()
    {
        const auto t0 = Clock::now();
        const auto wheel = build_wheel(default_progress_wheel());
        const auto stats = wheel_stats(wheel);
        const double secs = seconds_since(t0);
        // Moments are in ticks; one tick is half an hour.
        const bool exact_mean = stats.exact_mean.num * 5 == 27 * stats.exact_mean.den * 2;
        const double sd_h = stats.sd / 2.0;
        const bool pass = exact_mean && sd_h >= 2.85 && sd_h <= 2.95 && secs < 1.0;
        return {pass, "mean=" + std::to_string(stats.exact_mean.num) + "/" + std::to_string(stats.exact_mean.den * 2) +
                          "h sd=" + fmt(sd_h) + "h time=" + fmt(secs, 3) + "s"};
    }

    // 2. The CLI calibration search, verified independently.
    Verdict calibration_search()
    {
        const auto t0 = Clock::now();
        const std::string command = std::string("\"") + SPRINTSIM_CLI + "\" calibrate-wheel --mean 5.4 --sd 2.9 --slots 20";
        FILE *pipe = popen(command.c_str(), "r");
        if (!pipe)
        {
            return {false, "cannot run " + command};
        }
        std::string output;
        char buffer[4096];
        for (std::size_t n; (n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0;)
        {
            output.append(buffer, n);
        }
        const int rc = pclose(pipe);
        const double secs = seconds_since(t0);
        if (rc != 0)
        {
            return {false, "exit status " + std::to_string(rc)};
        }
        const auto j = nlohmann::json::parse(output);
        const auto wheel_config = j.at("progress_wheel").get<WheelConfig>();
        std::int64_t total = 0;
        bool has0 = false;
        bool has12 = false;
        for (const auto &s : wheel_config.slots)
        {
            total += s.weight;
            has0 = has0 || s.value == 0;
            has12 = has12 || s.value == 24;
        }
        const auto stats = moments_of(wheel_config.slots);
        const double mean_h = stats.mean / 2.0;
        const double sd_h = stats.sd / 2.0;
        const bool pass = total == 20 && has0 && has12 && std::abs(mean_h - 5.4) <= 0.05 && std::abs(sd_h - 2.9) <= 0.05 &&
                          secs < 10.0;
        return {pass, "mean=" + fmt(mean_h) + "h sd=" + fmt(sd_h) + "h slots=" + std::to_string(total) +
                          " has0=" + std::to_string(has0) + " has12=" + std::to_string(has12) + " time=" + fmt(secs, 3) + "s"};
    }

    // 3. Fuzzed live sessions replay to the identical state.
    Verdict determinism_replay()
    {
        const auto t0 = Clock::now();
        std::mt19937_64 gen(20240601);
        int mismatches = 0;
        int export_diffs = 0;
        std::size_t records = 0;
        const std::vector<BotKind> kinds = {BotKind::GreedyValue, BotKind::DependencyFirst, BotKind::SpecialistAware,
                                            BotKind::Random};
        for (int i = 0; i < 100; ++i)
        {
            const auto config = random_config(gen, 10);
            LiveSession live(config, fixed_clock);
            play_fuzzed(live, gen, BotPolicy{kinds[static_cast<std::size_t>(i) % kinds.size()],
                                              i % 2 ? OvertimeRule::WhenBehindIdeal : OvertimeRule::Never});
            records += live.journal().records().size();
            const auto log = parse_jsonl(export_session(live, "jsonl"));
            mismatches += canonical(replay_log(config, log)) != canonical(live.state());
            for (const auto *format : {"jsonl", "csv", "burndown-csv", "leaderboard-csv"})
            {
                export_diffs += export_session(live, format) != export_session(live, format);
            }
        }
        const double secs = seconds_since(t0);
        return {mismatches == 0 && export_diffs == 0 && secs < 60.0,
                "sessions=100 records=" + std::to_string(records) + " replay_mismatches=" + std::to_string(mismatches) +
                    " export_diffs=" + std::to_string(export_diffs) + " time=" + fmt(secs, 2) + "s"};
    }

    // 4. Every team receives the same draw per (day, member).
    Verdict lockstep()
    {
        int violations = 0;
        std::size_t compared = 0;
        const std::vector<BotPolicy> policies = {
            {BotKind::GreedyValue, OvertimeRule::Never},     {BotKind::DependencyFirst, OvertimeRule::WhenBehindIdeal},
            {BotKind::SpecialistAware, OvertimeRule::Never}, {BotKind::Random, OvertimeRule::WhenBehindIdeal},
        };
        for (std::uint64_t seed = 1; seed <= 50; ++seed)
        {
            auto config = default_config();
            config.team_count = 8;
            config.team_size = 6;
            config.sprint_length_days = 10;
            config.seed = seed;
            auto s = init_session(config);
            std::map<TeamId, RngState> rngs;
            std::map<TeamId, BotPolicy> team_policy;
            std::size_t k = 0;
            for (const auto &[id, team] : s.teams)
            {
                rngs[id] = bot_rng(seed * 1000 + k);
                team_policy[id] = policies[k++ % policies.size()];
            }
            while (s.phase != Phase::SprintClosed && s.phase != Phase::Finished)
            {
                for (const auto &[id, p] : team_policy)
                {
                    if (s.phase == Phase::Planning)
                    {
                        auto plan = plan_commands(s.teams.at(id), config, p, rngs[id]);
                        rngs[id] = plan.rng;
                        for (const auto &c : plan.commands)
                        {
                            s = submit(s, id, c);
                        }
                    }
                    auto daily = day_commands(s.teams.at(id), config, s.calendar, p, rngs[id]);
                    rngs[id] = daily.rng;
                    for (const auto &c : daily.commands)
                    {
                        s = submit(s, id, c);
                    }
                }
                s = advance_day(s).state;
            }
            // (day, member) -> drawn ticks as seen in each team's own log.
            std::map<std::pair<int, int>, std::set<std::int64_t>> seen;
            std::map<std::pair<int, int>, int> count;
            for (const auto &[id, team] : s.teams)
            {
                for (const auto &e : team.decision_log)
                {
                    if (e.kind == LogKind::Progress)
                    {
                        const std::pair key{e.day, e.payload.at("member").get<int>()};
                        seen[key].insert(e.payload.at("drawn_ticks").get<std::int64_t>());
                        ++count[key];
                    }
                }
            }
            if (seen.size() != 10 * 6)
            {
                ++violations;
            }
            for (const auto &[key, values] : seen)
            {
                ++compared;
                violations += values.size() != 1 || count[key] != 8;
            }
        }
        return {violations == 0, "seeds=50 teams=8 members=6 days=10 keys=" + std::to_string(compared) +
                                     " violations=" + std::to_string(violations)};
    }

    // 5. Work conservation over random team-days.
    Verdict conservation()
    {
        std::mt19937_64 gen(77);
        std::int64_t team_days = 0;
        int member_violations = 0;
        int absent_violations = 0;
        int balance_violations = 0;
        int total_violations = 0;
        while (team_days < 10000)
        {
            const auto config = random_config(gen, 10);
            auto s = init_session(config);
            std::map<TeamId, RngState> rngs;
            for (const auto &[id, team] : s.teams)
            {
                rngs[id] = bot_rng(gen());
            }
            const BotPolicy policy{static_cast<BotKind>(gen() % 4), gen() % 2 ? OvertimeRule::WhenBehindIdeal : OvertimeRule::Never};
            while (s.phase != Phase::Finished)
            {
                if (s.phase == Phase::SprintClosed)
                {
                    s = close_sprint(s);
                    continue;
                }
                for (auto &[id, rng] : rngs)
                {
                    for (int k = static_cast<int>(gen() % 3); k > 0; --k)
                    {
                        try
                        {
                            s = submit(s, id, random_command(s.teams.at(id), config, gen));
                        }
                        catch (const SimError &)
                        {
                        }
                    }
                    if (s.phase == Phase::Planning)
                    {
                        auto plan = plan_commands(s.teams.at(id), config, policy, rng);
                        rng = plan.rng;
                        for (const auto &c : plan.commands)
                        {
                            s = submit(s, id, c);
                        }
                    }
                    auto daily = day_commands(s.teams.at(id), config, s.calendar, policy, rng);
                    rng = daily.rng;
                    for (const auto &c : daily.commands)
                    {
                        s = submit(s, id, c);
                    }
                }
                std::map<TeamId, std::int64_t> before;
                for (const auto &[id, team] : s.teams)
                {
                    before[id] = committed_ticks(team);
                }
                const auto r = advance_day(s);
                for (const auto &[id, team] : r.state.teams)
                {
                    const auto &out = r.outcomes.at(id);
                    std::int64_t effective = 0;
                    std::int64_t applied = 0;
                    std::int64_t idle = 0;
                    for (const auto &m : out.members)
                    {
                        effective += m.effective.count();
                        applied += m.applied.count();
                        idle += m.idle.count();
                        member_violations += m.idle.count() != m.effective.count() - m.applied.count() || m.idle.count() < 0;
                        absent_violations += m.absent && m.effective != zero_ticks;
                    }
                    const std::int64_t after = committed_ticks(team);
                    balance_violations += after != before[id] - applied + out.event_added.count();
                    total_violations += out.applied.count() != applied || out.effective.count() != effective ||
                                        out.idle.count() != idle || idle != effective - applied || idle < 0;
                    ++team_days;
                }
                s = r.state;
            }
        }
        const int violations = member_violations + absent_violations + balance_violations + total_violations;
        return {violations == 0, "team_days=" + std::to_string(team_days) + " member=" + std::to_string(member_violations) +
                                     " absent=" + std::to_string(absent_violations) + " balance=" + std::to_string(balance_violations) +
                                     " totals=" + std::to_string(total_violations)};
    }

    // 15 independent 20h stories: exactly one sprint of nominal capacity.
    SessionConfig full_capacity_config()
    {
        std::vector<StoryDef> backlog;
        const std::vector<Priority> priorities = {Priority::Must, Priority::Should, Priority::Could};
        for (int i = 0; i < 15; ++i)
        {
            backlog.push_back(story("F" + std::to_string(i + 1), 1 + i % 8, priorities[static_cast<std::size_t>(i) % 3], {8, 6, 6}));
        }
        return small_config(backlog, 5, 10);
    }

    // 6. Most teams do not finish a full-capacity commitment.
    Verdict most_teams_fail()
    {
        const auto t0 = Clock::now();
        const auto config = full_capacity_config();
        const auto probe = run_bot_session(config, BotPolicy{});
        const bool full_commit = probe.planned.size() == 15;
        const auto table = run_batch(config, BotPolicy{}, 1000, 1, 0);
        const double secs = seconds_since(t0);
        const bool pass = full_commit && table.errors == 0 && table.completion_fraction < 0.20 && secs < 30.0;
        return {pass, "committed=" + std::to_string(probe.planned.size()) + " stories (300h) runs=1000 completion_fraction=" +
                          fmt(table.completion_fraction) + " time=" + fmt(secs, 2) + "s"};
    }

    // 7. Overtime lowers efficiency but never lowers completed work.
    Verdict overtime_economics()
    {
        int scenarios = 0;
        int efficiency_violations = 0;
        int output_violations = 0;
        double worst_gap = -1e9;
        for (int team_size = 4; team_size <= 6; ++team_size)
        {
            for (std::int64_t ot_ticks : {2, 4})
            {
                for (std::uint64_t seed = 1; seed <= 4; ++seed)
                {
                    ++scenarios;
                    // Each member owns a queue of small tasks that cannot run dry.
                    std::mt19937_64 gen(seed * 31 + static_cast<std::uint64_t>(team_size) * 7 + static_cast<std::uint64_t>(ot_ticks));
                    std::vector<StoryDef> backlog;
                    for (int m = 1; m <= team_size; ++m)
                    {
                        std::vector<double> tasks;
                        double total = 0;
                        while (total < 160)
                        {
                            const double hours = 0.5 * static_cast<double>(1 + gen() % 4);
                            tasks.push_back(hours);
                            total += hours;
                        }
                        backlog.push_back(story("W" + std::to_string(m), 5, Priority::Should, tasks));
                    }
                    auto config = small_config(backlog, team_size, 10);
                    config.seed = seed;
                    auto base = init_session(config);
                    std::vector<StoryId> ids;
                    for (const auto &b : backlog)
                    {
                        ids.push_back(b.id);
                    }
                    base = cmd(base, PlanCommit{ids});
                    for (const auto &b : backlog)
                    {
                        const int m = std::stoi(b.id.substr(1));
                        for (const auto &t : b.tasks)
                        {
                            base = cmd(base, AssignTask{m, t.id, {}});
                        }
                    }
                    auto plain = base;
                    auto extra = base;
                    while (plain.phase != Phase::SprintClosed)
                    {
                        for (int m = 1; m <= team_size; ++m)
                        {
                            if (!extra.teams.at("T1").assignments.at(m).empty())
                            {
                                extra = cmd(extra, SetOvertime{m, Ticks{ot_ticks}});
                            }
                        }
                        auto a = advance_day(plain);
                        auto b = advance_day_with(extra, a.draws);
                        plain = std::move(a.state);
                        extra = std::move(b.state);
                    }
                    const auto &pc = config.policy;
                    const double e_plain = *efficiency(plain.teams.at("T1"), pc);
                    const double e_extra = *efficiency(extra.teams.at("T1"), pc);
                    efficiency_violations += !(e_extra < e_plain);
                    output_violations += completed_estimate_hours(extra.teams.at("T1")) < completed_estimate_hours(plain.teams.at("T1"));
                    worst_gap = std::max(worst_gap, e_extra - e_plain);
                }
            }
        }
        return {scenarios >= 20 && efficiency_violations == 0 && output_violations == 0,
                "scenarios=" + std::to_string(scenarios) + " efficiency_not_lower=" + std::to_string(efficiency_violations) +
                    " output_lower=" + std::to_string(output_violations) + " max(eff_ot-eff)=" + fmt(worst_gap)};
    }

    // 8. Specialists idle more and deliver no more value than generalists.
    Verdict specialist_contention()
    {
        std::vector<StoryDef> backlog;
        const std::vector<Priority> priorities = {Priority::Must, Priority::Should, Priority::Could};
        for (int i = 0; i < 20; ++i)
        {
            auto s = story("P" + std::to_string(i + 1), 1 + (i * 3) % 8, priorities[static_cast<std::size_t>(i) % 3], {6, 6, 8});
            s.tasks[0].required_role = "tester";
            s.tasks[1].required_role = "designer";
            backlog.push_back(s);
        }
        auto specialist = small_config(backlog, 5, 10);
        specialist.members = {{1, "Tess", "tester"},
                              {2, "Dana", "designer"},
                              {3, "Gil", generalist_role},
                              {4, "Gus", generalist_role},
                              {5, "Gwen", generalist_role}};
        auto generalist = specialist;
        for (auto &s : generalist.backlog)
        {
            for (auto &t : s.tasks)
            {
                t.required_role.reset();
            }
        }
        Ticks restricted;
        Ticks total;
        for (const auto &s : specialist.backlog)
        {
            for (const auto &t : s.tasks)
            {
                total += t.estimate;
                restricted += t.required_role ? t.estimate : zero_ticks;
            }
        }
        const BotPolicy policy{BotKind::SpecialistAware, OvertimeRule::Never};
        const auto a = run_batch(specialist, policy, 500, 1, 0);
        const auto b = run_batch(generalist, policy, 500, 1, 0);
        auto mean_of = [](const OutcomeTable &t, auto field)
        {
            double sum = 0;
            for (const auto &r : t.rows)
            {
                sum += static_cast<double>(field(r));
            }
            return sum / static_cast<double>(t.rows.size());
        };
        const double idle_s = mean_of(a, [](const RunRow &r) { return r.idle_hours; });
        const double idle_g = mean_of(b, [](const RunRow &r) { return r.idle_hours; });
        const double value_s = mean_of(a, [](const RunRow &r) { return r.value; });
        const double value_g = mean_of(b, [](const RunRow &r) { return r.value; });
        const double share = static_cast<double>(restricted.count()) / static_cast<double>(total.count());
        const bool pass = a.errors == 0 && b.errors == 0 && std::abs(share - 0.6) < 1e-9 && idle_s > idle_g && value_s <= value_g;
        return {pass, "seeds=500 restricted_share=" + fmt(share, 2) + " idle specialist=" + fmt(idle_s, 2) + "h generalist=" +
                          fmt(idle_g, 2) + "h value specialist=" + fmt(value_s, 2) + " generalist=" + fmt(value_g, 2)};
    }

    // 9. An unfinished story carries its remaining hours and earns nothing until accepted.
    Verdict carryover()
    {
        auto config = small_config({story("A", 5, Priority::Must, {4, 4, 4, 4, 4}), story("B", 3, Priority::Should, {6})}, 2, 5);
        config.sprint_count = 2;
        const PolicyConstants &pc = config.policy;
        auto s = init_session(config);
        s = cmd(s, PlanCommit{{"A", "B"}});
        for (int k = 1; k <= 5; ++k)
        {
            s = cmd(s, AssignTask{1, "A-T" + std::to_string(k), {}});
        }
        s = cmd(s, AssignTask{2, "B-T1", {}});
        // Member 1 finishes four 4h tasks and 1.5h of the fifth.
        const std::vector<std::vector<double>> sprint1 = {{4, 6}, {4, 0}, {4, 0}, {5.5, 0}, {0, 0}};
        for (const auto &draws : sprint1)
        {
            s = advance_day_with(s, scripted(s, draws)).state;
        }
        bool ok = s.phase == Phase::SprintClosed;
        ok = ok && value_delivered(s.teams.at("T1"), pc) == 6;
        s = close_sprint(s);
        const auto &t1 = s.teams.at("T1");
        const Ticks carried = t1.tasks.at("A-T5").remaining;
        ok = ok && t1.stories.at("A").status == StoryStatus::Backlog && carried == h(2.5);
        ok = ok && t1.tasks.at("A-T4").status == TaskStatus::Done && value_delivered(t1, pc) == 6;
        ok = ok && s.phase == Phase::Planning && s.calendar.sprint_index == 2;

        s = cmd(s, PlanCommit{{"A"}});
        ok = ok && committed_remaining(s.teams.at("T1")) == carried;
        s = cmd(s, AssignTask{1, "A-T5", {}});
        s = advance_day_with(s, scripted(s, {2, 0})).state;
        ok = ok && value_delivered(s.teams.at("T1"), pc) == 6 && s.teams.at("T1").stories.at("A").status == StoryStatus::Committed;
        s = advance_day_with(s, scripted(s, {2, 0})).state;
        const auto final_value = value_delivered(s.teams.at("T1"), pc);
        ok = ok && s.teams.at("T1").stories.at("A").status == StoryStatus::Done && final_value == 6 + 15;
        const auto origin2 = s.teams.at("T1").burndown_origin.at(1);
        ok = ok && origin2 == carried;
        return {ok, "carried=" + fmt(carried.hours(), 1) + "h sprint2_origin=" + fmt(origin2.hours(), 1) +
                        "h value_after_sprint1=6 value_after_acceptance=" + std::to_string(final_value)};
    }

    // 10. Crash recovery from snapshot plus log, and tamper detection.
    Verdict service_contract()
    {
        auto config = default_config();
        config.team_count = 2;
        config.seed = 606;

        // Uninterrupted reference.
        std::string at_day6;
        std::string reference;
        {
            SessionService service({std::nullopt, 5, fixed_clock});
            const auto id = service.create(config).id;
            std::map<TeamId, RngState> rngs;
            for (int day = 1; day <= 6; ++day)
            {
                service_bot_step(service, id, rngs);
            }
            at_day6 = canonical(service.snapshot_state(id));
            while (service.snapshot_state(id).phase != Phase::Finished)
            {
                service_bot_step(service, id, rngs);
            }
            reference = canonical(service.snapshot_state(id));
        }

        TempDir dir;
        SessionId id;
        std::map<TeamId, RngState> rngs;
        {
            SessionService service({dir.path, 5, fixed_clock});
            id = service.create(config).id;
            for (int day = 1; day <= 6; ++day)
            {
                service_bot_step(service, id, rngs);
            }
            // The process dies here, mid-way through writing the next record.
        }
        const auto log_path = dir.path / id / "log.jsonl";
        {
            std::ofstream torn(log_path, std::ios::binary | std::ios::app);
            torn << R"({"day":7,"kind":"Command","payload":{"comm)";
        }
        const bool had_snapshot = std::filesystem::exists(dir.path / id / "snapshot.json");
        bool recovered_equal = false;
        bool final_equal = false;
        {
            SessionService service({dir.path, 5, fixed_clock});
            recovered_equal = canonical(service.snapshot_state(id)) == at_day6;
            while (service.snapshot_state(id).phase != Phase::Finished)
            {
                service_bot_step(service, id, rngs);
            }
            final_equal = canonical(service.snapshot_state(id)) == reference;
        }

        // Mutate one record in the persisted log.
        std::string text;
        {
            std::ifstream in(log_path, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        auto records = parse_jsonl(text);
        const std::size_t victim = records.size() / 2;
        records[victim].payload["tampered"] = true;
        {
            std::ofstream out(log_path, std::ios::binary | std::ios::trunc);
            out << to_jsonl(records);
        }
        std::string detected;
        try
        {
            SessionService service({dir.path, 5, fixed_clock});
        }
        catch (const SimError &e)
        {
            if (e.code() == ErrorCode::Integrity)
            {
                detected = e.what();
            }
        }
        const std::string expected_seq = "seq " + std::to_string(records[victim].seq);
        const bool tamper_flagged = detected.find(expected_seq) != std::string::npos;
        return {had_snapshot && recovered_equal && final_equal && tamper_flagged,
                std::string("snapshot=") + (had_snapshot ? "yes" : "no") + " recovered_day6_equal=" + (recovered_equal ? "yes" : "no") +
                    " final_equal=" + (final_equal ? "yes" : "no") + " tamper=" + (tamper_flagged ? detected : "not detected")};
    }
}

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"wheel calibration", wheel_calibration},
        {"calibration search", calibration_search},
        {"determinism and replay", determinism_replay},
        {"lockstep draws", lockstep},
        {"conservation fuzz", conservation},
        {"most teams won't complete", most_teams_fail},
        {"overtime economics", overtime_economics},
        {"specialist contention", specialist_contention},
        {"carryover", carryover},
        {"service contract", service_contract},
    };
    int failed = 0;
    int n = 0;
    for (const auto &[name, check] : criteria)
    {
        ++n;
        Verdict v;
        try
        {
            v = check();
        }
        catch (const std::exception &e)
        {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << v.detail << std::endl;
    }
    std::cout << (n - failed) << "/" << n << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
