#include "sprintsim/service.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/metrics.hpp"
#include "sprintsim/serialize.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace sprintsim
{
    std::string utc_now()
    {
        const auto now = std::chrono::system_clock::now();
        const auto secs = std::chrono::system_clock::to_time_t(now);
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
        std::tm tm{};
        gmtime_r(&secs, &tm);
        std::ostringstream os;
        os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
        return os.str();
    }

    json snapshot_json(const Snapshot &s)
    {
        return {{"watermark", s.watermark}, {"version", s.version}, {"hash", s.hash}, {"state", s.state}};
    }

    Snapshot snapshot_from_json(const json &j)
    {
        Snapshot s;
        s.watermark = j.at("watermark").get<std::int64_t>();
        s.version = j.at("version").get<std::int64_t>();
        s.hash = j.at("hash").get<std::string>();
        s.state = j.at("state").get<SessionState>();
        return s;
    }

    namespace
    {
        [[noreturn]] void fail(ErrorCode code, const std::string &message) { throw SimError(code, message); }

        std::string format_number(double v)
        {
            if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15)
            {
                return std::to_string(static_cast<long long>(v));
            }
            std::ostringstream os;
            os << std::setprecision(10) << v;
            return os.str();
        }

        std::string csv_field(std::string_view s)
        {
            if (s.find_first_of(",\"\n\r") == std::string_view::npos)
            {
                return std::string(s);
            }
            std::string out = "\"";
            for (char c : s)
            {
                if (c == '"')
                {
                    out += '"';
                }
                out += c;
            }
            out += '"';
            return out;
        }

        std::string hours_text(Ticks t) { return format_number(t.hours()) + "h"; }

        std::string summarize_command(const Command &command)
        {
            return std::visit(
                [](const auto &c) -> std::string
                {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, PlanCommit>)
                    {
                        std::string s = "commit";
                        for (const auto &id : c.stories)
                        {
                            s += ' ' + id;
                        }
                        return s;
                    }
                    else if constexpr (std::is_same_v<T, AssignTask>)
                    {
                        return "assign " + c.task + " to member " + std::to_string(c.member);
                    }
                    else if constexpr (std::is_same_v<T, UnassignTask>)
                    {
                        return "unassign " + c.task + " from member " + std::to_string(c.member);
                    }
                    else if constexpr (std::is_same_v<T, SetOvertime>)
                    {
                        return "overtime " + hours_text(c.hours) + " for member " + std::to_string(c.member);
                    }
                    else if constexpr (std::is_same_v<T, DropStory>)
                    {
                        return "drop " + c.story;
                    }
                    else if constexpr (std::is_same_v<T, LogNote> || std::is_same_v<T, FacilitatorNote>)
                    {
                        return c.text;
                    }
                    else
                    {
                        return "daily scrum closed";
                    }
                },
                command);
        }

        std::string summarize(const LogRecord &r)
        {
            switch (r.kind)
            {
            case RecordKind::Command:
                return summarize_command(r.payload.at("command").get<Command>());
            case RecordKind::Draws:
            {
                const auto d = r.payload.at("draws").get<DayDraws>();
                std::string s = "day " + std::to_string(d.day) + ": ";
                s += d.event ? "event " + d.event->card_id : "no event";
                s += "; progress";
                for (const auto &[m, v] : d.progress)
                {
                    s += ' ' + std::to_string(m) + '=' + hours_text(v);
                }
                return s;
            }
            case RecordKind::EventApplied:
                return r.payload.value("effect", std::string{});
            case RecordKind::Advance:
                return "sprint " + std::to_string(r.payload.value("sprint", 0)) + " closed";
            case RecordKind::Note:
                return r.payload.value("text", r.payload.value("event", std::string{}));
            }
            return {};
        }

        std::string actor_of(const LogRecord &r)
        {
            switch (r.kind)
            {
            case RecordKind::Command:
            {
                const auto &cmd = r.payload.at("command");
                if (cmd.at("type") == "FacilitatorNote")
                {
                    return "facilitator";
                }
                if (cmd.contains("author") && !cmd["author"].is_null())
                {
                    return "member " + std::to_string(cmd["author"].get<int>());
                }
                return "team";
            }
            case RecordKind::Draws:
            case RecordKind::Advance:
                return "facilitator";
            case RecordKind::EventApplied:
                return "engine";
            case RecordKind::Note:
                return r.payload.value("author", std::string{"system"});
            }
            return "system";
        }

        std::string random_hex(std::size_t bytes)
        {
            static thread_local std::random_device rd;
            static constexpr char hex[] = "0123456789abcdef";
            std::string out;
            for (std::size_t i = 0; i < bytes; ++i)
            {
                const auto b = rd() & 0xFF;
                out.push_back(hex[b >> 4]);
                out.push_back(hex[b & 0xF]);
            }
            return out;
        }

        std::string read_file(const std::filesystem::path &p)
        {
            std::ifstream in(p, std::ios::binary);
            if (!in)
            {
                fail(ErrorCode::Io, "cannot read " + p.string());
            }
            std::ostringstream os;
            os << in.rdbuf();
            return os.str();
        }

        void write_file_atomic(const std::filesystem::path &p, const std::string &content)
        {
            const auto tmp = p.string() + ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out)
                {
                    fail(ErrorCode::Io, "cannot write " + tmp);
                }
                out << content;
                out.flush();
                if (!out)
                {
                    fail(ErrorCode::Io, "short write to " + tmp);
                }
            }
            std::filesystem::rename(tmp, p);
        }
    }

    LiveSession::LiveSession(SessionConfig config, Clock clock) : m_clock(std::move(clock))
    {
        m_state = init_session(config);
        append("session", RecordKind::Note,
               {{"event", "session_created"}, {"config_sha256", config_fingerprint(m_state.config)}});
    }

    LiveSession LiveSession::recover(SessionConfig config, std::vector<LogRecord> records,
                                     const std::optional<Snapshot> &snapshot, Clock clock)
    {
        verify_chain(records);
        LiveSession live;
        live.m_clock = std::move(clock);
        std::size_t start = 0;
        if (snapshot)
        {
            const auto w = snapshot->watermark;
            if (w < 1 || w > static_cast<std::int64_t>(records.size()) ||
                records[static_cast<std::size_t>(w - 1)].hash != snapshot->hash)
            {
                fail(ErrorCode::Integrity, "integrity error: snapshot at seq " + std::to_string(w) + " does not match the log");
            }
            if (!(snapshot->state.config == config))
            {
                fail(ErrorCode::Integrity, "integrity error: snapshot was taken under a different config");
            }
            live.m_state = snapshot->state;
            start = static_cast<std::size_t>(w);
            const auto steps = replay_steps(std::span<const LogRecord>(records).subspan(start));
            for (const auto &step : steps)
            {
                try
                {
                    live.m_state = apply_step(std::move(live.m_state), step);
                }
                catch (const SimError &e)
                {
                    fail(ErrorCode::Integrity, "integrity error at seq " + std::to_string(step.seq) + ": " + e.what());
                }
            }
        }
        else
        {
            live.m_state = replay_log(config, records);
        }
        for (const auto &r : records)
        {
            if (changes_state(r.kind))
            {
                ++live.m_version;
            }
        }
        live.m_journal = Journal::from_records(std::move(records));
        return live;
    }

    const LogRecord &LiveSession::append(std::string team, RecordKind kind, json payload)
    {
        LogRecord r;
        r.wall_time = m_clock ? m_clock() : std::string{};
        r.day = m_state.calendar.absolute_day;
        r.team = std::move(team);
        r.kind = kind;
        r.payload = std::move(payload);
        const auto &stored = m_journal.append(std::move(r));
        if (changes_state(kind))
        {
            ++m_version;
        }
        if (m_sink)
        {
            m_sink(stored);
        }
        return stored;
    }

    bool LiveSession::gate_open() const
    {
        return std::all_of(m_state.teams.begin(), m_state.teams.end(), [](const auto &kv) { return kv.second.scrum_closed; });
    }

    CommandOutcome LiveSession::post_command(const TeamId &team, const Command &command, std::optional<std::int64_t> expected_version)
    {
        if (expected_version && *expected_version != m_version)
        {
            fail(ErrorCode::Conflict, "state version is " + std::to_string(m_version) + ", not " + std::to_string(*expected_version));
        }
        SessionState next = submit(m_state, team, command);
        CommandOutcome out;
        if (std::holds_alternative<PlanCommit>(command))
        {
            const auto planned = committed_remaining(next.teams.at(team));
            const auto capacity = sprint_capacity(next.config);
            if (planned > capacity)
            {
                out.warnings.push_back("committed " + hours_text(planned) + " exceeds sprint capacity of " + hours_text(capacity));
            }
        }
        append(team, RecordKind::Command, {{"command", command}});
        m_state = std::move(next);
        out.version = m_version;
        return out;
    }

    SpinOutcome LiveSession::spin_day(bool override_gate, std::optional<int> expected_day)
    {
        if (m_state.phase != Phase::Planning && m_state.phase != Phase::InDay)
        {
            fail(ErrorCode::Phase, "cannot spin in phase " + json(m_state.phase).get<std::string>());
        }
        if (expected_day && *expected_day != m_state.calendar.absolute_day)
        {
            fail(ErrorCode::Phase, "day " + std::to_string(*expected_day) + " has already been spun");
        }
        if (!gate_open())
        {
            if (!override_gate)
            {
                fail(ErrorCode::Phase, "daily scrum still open for at least one team");
            }
            append("session", RecordKind::Note,
                   {{"type", "FacilitatorNote"}, {"author", "facilitator"}, {"text", "gate override: spun before every team closed its daily scrum"}});
        }
        auto result = advance_day(m_state);
        append("session", RecordKind::Draws, {{"draws", result.draws}});
        const int day = m_state.calendar.absolute_day;
        m_state = std::move(result.state);
        for (const auto &[tid, outcome] : result.outcomes)
        {
            if (!outcome.event)
            {
                continue;
            }
            LogRecord r;
            r.wall_time = m_clock ? m_clock() : std::string{};
            r.day = day;
            r.team = tid;
            r.kind = RecordKind::EventApplied;
            r.payload = {{"card", result.draws.event->card_id},
                         {"effect", outcome.event->effect},
                         {"fizzled", outcome.event->fizzled},
                         {"scope_delta_ticks", outcome.event->scope_delta}};
            const auto &stored = m_journal.append(std::move(r));
            if (m_sink)
            {
                m_sink(stored);
            }
        }
        return {m_version, std::move(result.draws), std::move(result.outcomes)};
    }

    std::int64_t LiveSession::close_sprint()
    {
        const int sprint = m_state.calendar.sprint_index;
        SessionState next = sprintsim::close_sprint(m_state);
        append("session", RecordKind::Advance, {{"action", "close_sprint"}, {"sprint", sprint}});
        m_state = std::move(next);
        return m_version;
    }

    void LiveSession::note(std::string text)
    {
        append("session", RecordKind::Note, {{"type", "FacilitatorNote"}, {"author", "facilitator"}, {"text", std::move(text)}});
    }

    Snapshot LiveSession::snapshot() const
    {
        return {m_journal.last_seq(), m_version, m_journal.last_hash(), m_state};
    }

    void play_with_bots(LiveSession &session, const BotPolicy &policy)
    {
        std::map<TeamId, RngState> rngs;
        std::uint64_t t = 0;
        for (const auto &[id, team] : session.state().teams)
        {
            rngs[id] = bot_rng(session.config().seed).advanced(t++ << 32);
        }
        while (session.state().phase != Phase::Finished)
        {
            if (session.state().phase == Phase::SprintClosed)
            {
                session.close_sprint();
                continue;
            }
            for (auto &[id, rng] : rngs)
            {
                if (session.state().phase == Phase::Planning)
                {
                    auto plan = plan_commands(session.state().teams.at(id), session.config(), policy, rng);
                    rng = plan.rng;
                    for (const auto &cmd : plan.commands)
                    {
                        session.post_command(id, cmd);
                    }
                }
                auto daily = day_commands(session.state().teams.at(id), session.config(), session.state().calendar, policy, rng);
                rng = daily.rng;
                for (const auto &cmd : daily.commands)
                {
                    session.post_command(id, cmd);
                }
            }
            session.spin_day();
        }
    }

    json metrics_json(const SessionState &state)
    {
        const auto &config = state.config;
        json teams = json::object();
        for (const auto &[tid, team] : state.teams)
        {
            json burndown = json::array();
            for (const auto &p : sprint_burndown(team, state.calendar.sprint_index))
            {
                burndown.push_back({{"day", p.x}, {"remaining_ticks", std::llround(p.y * 2)}});
            }
            const auto origin = sprint_burndown(team, state.calendar.sprint_index).front().y;
            const auto ideal = ideal_line(Ticks{std::llround(origin * 2)}, config.sprint_length_days, config.team_size, config.ideal_line);
            json ideal_points = json::array();
            for (const auto &p : ideal.series)
            {
                ideal_points.push_back({{"day", p.x}, {"ticks", p.y * 2}});
            }
            json release = json::array();
            for (const auto &p : release_burndown(team, config.ideal_line))
            {
                release.push_back({{"sprint", p.x}, {"points", std::llround(p.y)}});
            }
            const auto eff = efficiency(team, config.policy);
            const auto effect = effectiveness(team, config.policy);
            teams[tid] = {{"sprint", state.calendar.sprint_index},
                          {"burndown", std::move(burndown)},
                          {"ideal", {{"origin_ticks", ideal.origin * 2}, {"points", std::move(ideal_points)}}},
                          {"release_burndown", std::move(release)},
                          {"value_delivered", value_delivered(team, config.policy)},
                          {"committed_value", team.committed_value},
                          {"labor_cost_hours", labor_cost(team, config.policy)},
                          {"efficiency", eff ? json(*eff) : json(nullptr)},
                          {"effectiveness", effect ? json(*effect) : json(nullptr)},
                          {"idle_ticks", team.idle_total}};
        }
        json board = json::array();
        int rank = 1;
        for (const auto &row : leaderboard(state))
        {
            board.push_back({{"rank", rank++},
                             {"team", row.team},
                             {"value", row.value},
                             {"cost_hours", row.cost},
                             {"efficiency", row.efficiency ? json(*row.efficiency) : json(nullptr)},
                             {"effectiveness", row.effectiveness ? json(*row.effectiveness) : json(nullptr)},
                             {"exceeds_commitment", row.exceeds_commitment}});
        }
        return {{"teams", std::move(teams)}, {"leaderboard", std::move(board)}};
    }

    std::string export_session(const LiveSession &session, std::string_view format)
    {
        const auto &records = session.journal().records();
        const auto &state = session.state();
        std::ostringstream os;
        if (format == "jsonl")
        {
            return to_jsonl(records);
        }
        if (format == "csv")
        {
            os << "seq,day,team,actor,kind,summary,payload\n";
            for (const auto &r : records)
            {
                os << r.seq << ',' << r.day << ',' << csv_field(r.team) << ',' << csv_field(actor_of(r)) << ','
                   << json(r.kind).get<std::string>() << ',' << csv_field(summarize(r)) << ',' << csv_field(r.payload.dump())
                   << '\n';
            }
            return os.str();
        }
        if (format == "burndown-csv")
        {
            os << "team,sprint,day,remaining_hours,ideal_hours\n";
            const auto &config = state.config;
            for (const auto &[tid, team] : state.teams)
            {
                const int sprints = std::max<int>(1, static_cast<int>(team.burndown_origin.size()));
                for (int s = 1; s <= sprints; ++s)
                {
                    const auto actual = sprint_burndown(team, s);
                    const auto ideal = ideal_line(Ticks{std::llround(actual.front().y * 2)}, config.sprint_length_days,
                                                  config.team_size, config.ideal_line);
                    for (const auto &p : actual)
                    {
                        os << tid << ',' << s << ',' << p.x << ',' << format_number(p.y) << ','
                           << format_number(ideal.series.at(static_cast<std::size_t>(p.x)).y) << '\n';
                    }
                }
            }
            return os.str();
        }
        if (format == "leaderboard-csv")
        {
            os << "rank,team,value,cost_hours,efficiency,effectiveness,exceeds_commitment\n";
            int rank = 1;
            for (const auto &row : leaderboard(state))
            {
                os << rank++ << ',' << row.team << ',' << row.value << ',' << format_number(row.cost) << ','
                   << (row.efficiency ? format_number(*row.efficiency) : "") << ','
                   << (row.effectiveness ? format_number(*row.effectiveness) : "") << ','
                   << (row.exceeds_commitment ? "true" : "false") << '\n';
            }
            return os.str();
        }
        fail(ErrorCode::Format, "unknown export format '" + std::string(format) + "'");
    }

    struct SessionService::Entry
    {
        mutable std::mutex mutex;
        mutable std::condition_variable changed;
        std::optional<LiveSession> live;
        std::string facilitator_token;
        std::string team_token;
        std::filesystem::path dir;
        std::ofstream log_out;
        int spins_since_snapshot = 0;
    };

    SessionService::SessionService(ServiceOptions options) : m_options(std::move(options))
    {
        if (m_options.data_dir)
        {
            std::filesystem::create_directories(*m_options.data_dir);
            load_all();
        }
    }

    SessionService::~SessionService() = default;

    std::shared_ptr<SessionService::Entry> SessionService::find(const SessionId &id) const
    {
        std::lock_guard lock(m_mutex);
        auto it = m_sessions.find(id);
        if (it == m_sessions.end())
        {
            fail(ErrorCode::NotFound, "unknown session '" + id + "'");
        }
        return it->second;
    }

    namespace
    {
        void attach_log_sink(LiveSession &live, std::ofstream &out)
        {
            live.on_append([&out](const LogRecord &r)
                           {
                               out << record_json(r).dump() << '\n';
                               out.flush();
                               if (!out)
                               {
                                   throw SimError(ErrorCode::Io, "failed to append to the session log");
                               }
                           });
        }
    }

    CreatedSession SessionService::create(const SessionConfig &config)
    {
        const auto violations = validate_config(config);
        if (!violations.empty())
        {
            std::string message = "invalid config";
            for (const auto &v : violations)
            {
                message += "; " + v.field + ": " + v.rule;
            }
            fail(ErrorCode::Validation, message);
        }
        auto entry = std::make_shared<Entry>();
        entry->live.emplace(config, m_options.clock);
        entry->facilitator_token = random_hex(16);
        entry->team_token = random_hex(16);
        const SessionId id = "s-" + random_hex(8);

        if (m_options.data_dir)
        {
            entry->dir = *m_options.data_dir / id;
            std::filesystem::create_directories(entry->dir);
            write_file_atomic(entry->dir / "config.json", json(config).dump());
            write_file_atomic(entry->dir / "tokens.json",
                              json{{"facilitator", entry->facilitator_token}, {"team", entry->team_token}}.dump());
            write_file_atomic(entry->dir / "log.jsonl", to_jsonl(entry->live->journal().records()));
            entry->log_out.open(entry->dir / "log.jsonl", std::ios::binary | std::ios::app);
            attach_log_sink(*entry->live, entry->log_out);
        }

        CreatedSession out{id, entry->facilitator_token, entry->team_token, config_warnings(config)};
        std::lock_guard lock(m_mutex);
        m_sessions.emplace(id, std::move(entry));
        return out;
    }

    void SessionService::load_all()
    {
        for (const auto &dirent : std::filesystem::directory_iterator(*m_options.data_dir))
        {
            if (!dirent.is_directory() || !std::filesystem::exists(dirent.path() / "config.json"))
            {
                continue;
            }
            const auto dir = dirent.path();
            const SessionId id = dir.filename().string();
            const auto config = parse_config(read_file(dir / "config.json"));
            const auto tokens = json::parse(read_file(dir / "tokens.json"));
            const auto log_text = read_file(dir / "log.jsonl");
            auto records = parse_jsonl(log_text, true);
            std::optional<Snapshot> snapshot;
            if (std::filesystem::exists(dir / "snapshot.json"))
            {
                snapshot = snapshot_from_json(json::parse(read_file(dir / "snapshot.json")));
            }

            auto entry = std::make_shared<Entry>();
            entry->dir = dir;
            entry->facilitator_token = tokens.at("facilitator").get<std::string>();
            entry->team_token = tokens.at("team").get<std::string>();
            try
            {
                entry->live.emplace(LiveSession::recover(config, records, snapshot, m_options.clock));
            }
            catch (const SimError &e)
            {
                throw SimError(ErrorCode::Integrity, "session " + id + ": " + e.what());
            }
            // Drop a torn tail so new appends start on a clean line.
            const auto clean = to_jsonl(entry->live->journal().records());
            if (clean != log_text)
            {
                write_file_atomic(dir / "log.jsonl", clean);
            }
            entry->log_out.open(dir / "log.jsonl", std::ios::binary | std::ios::app);
            attach_log_sink(*entry->live, entry->log_out);
            m_sessions.emplace(id, std::move(entry));
        }
    }

    void SessionService::persist_snapshot(Entry &entry)
    {
        if (entry.dir.empty())
        {
            return;
        }
        write_file_atomic(entry.dir / "snapshot.json", snapshot_json(entry.live->snapshot()).dump());
        entry.spins_since_snapshot = 0;
    }

    void SessionService::authorize(const SessionId &id, std::string_view token, Access access) const
    {
        const auto entry = find(id);
        const bool facilitator = !token.empty() && token == entry->facilitator_token;
        const bool team = !token.empty() && token == entry->team_token;
        const bool ok = access == Access::Facilitator ? facilitator : (facilitator || team);
        if (!ok)
        {
            fail(ErrorCode::Auth, access == Access::Facilitator ? "facilitator token required" : "session token required");
        }
    }

    json SessionService::state_json(const SessionId &id) const
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        const auto &live = *entry->live;
        return {{"id", id},
                {"version", live.version()},
                {"phase", live.state().phase},
                {"gate_open", live.gate_open()},
                {"state", live.state()}};
    }

    std::int64_t SessionService::version(const SessionId &id) const
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        return entry->live->version();
    }

    CommandOutcome SessionService::post_command(const SessionId &id, const TeamId &team, const Command &command,
                                                std::optional<std::int64_t> expected_version)
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        auto out = entry->live->post_command(team, command, expected_version);
        entry->changed.notify_all();
        return out;
    }

    SpinOutcome SessionService::spin_day(const SessionId &id, bool override_gate, std::optional<int> expected_day)
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        auto out = entry->live->spin_day(override_gate, expected_day);
        if (m_options.snapshot_every_spins > 0 && ++entry->spins_since_snapshot >= m_options.snapshot_every_spins)
        {
            persist_snapshot(*entry);
        }
        entry->changed.notify_all();
        return out;
    }

    std::int64_t SessionService::close_sprint(const SessionId &id)
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        const auto v = entry->live->close_sprint();
        if (m_options.snapshot_every_spins > 0)
        {
            persist_snapshot(*entry);
        }
        entry->changed.notify_all();
        return v;
    }

    void SessionService::note(const SessionId &id, std::string text)
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        entry->live->note(std::move(text));
    }

    json SessionService::metrics(const SessionId &id) const
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        json j = metrics_json(entry->live->state());
        j["version"] = entry->live->version();
        return j;
    }

    std::string SessionService::export_session(const SessionId &id, std::string_view format) const
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        return sprintsim::export_session(*entry->live, format);
    }

    SessionState SessionService::snapshot_state(const SessionId &id) const
    {
        const auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        return entry->live->state();
    }

    std::int64_t SessionService::wait_for_change(const SessionId &id, std::int64_t seen, std::chrono::milliseconds timeout) const
    {
        const auto entry = find(id);
        std::unique_lock lock(entry->mutex);
        entry->changed.wait_for(lock, timeout, [&] { return entry->live->version() > seen; });
        return entry->live->version();
    }

    std::vector<SessionId> SessionService::session_ids() const
    {
        std::lock_guard lock(m_mutex);
        std::vector<SessionId> ids;
        for (const auto &[id, e] : m_sessions)
        {
            ids.push_back(id);
        }
        return ids;
    }
}
