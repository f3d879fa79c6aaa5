#pragma once

// Live sessions: every accepted command and every spin is appended to the
// session journal before the new state becomes visible.

#include "sprintsim/bots.hpp"
#include "sprintsim/engine.hpp"
#include "sprintsim/journal.hpp"

#include "json.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sprintsim
{
    using Clock = std::function<std::string()>;

    // ISO-8601 UTC wall time with millisecond precision.
    std::string utc_now();

    struct Snapshot
    {
        std::int64_t watermark = 0;
        std::int64_t version = 0;
        // Hash of the record at the watermark; ties the snapshot to its log.
        std::string hash;
        SessionState state;
    };

    nlohmann::json snapshot_json(const Snapshot &snapshot);
    Snapshot snapshot_from_json(const nlohmann::json &j);

    struct CommandOutcome
    {
        std::int64_t version = 0;
        std::vector<std::string> warnings;
    };

    struct SpinOutcome
    {
        std::int64_t version = 0;
        DayDraws draws;
        std::map<TeamId, TeamDayOutcome> outcomes;
    };

    // One session and its journal. Not synchronized; SessionService owns the
    // per-session writer lock.
    class LiveSession
    {
    public:
        explicit LiveSession(SessionConfig config, Clock clock = utc_now);

        // Rebuilds from a verified log, starting at the snapshot when given.
        static LiveSession recover(SessionConfig config, std::vector<LogRecord> records,
                                   const std::optional<Snapshot> &snapshot, Clock clock = utc_now);

        const SessionState &state() const noexcept { return m_state; }
        const SessionConfig &config() const noexcept { return m_state.config; }
        const Journal &journal() const noexcept { return m_journal; }
        std::int64_t version() const noexcept { return m_version; }

        // All teams have closed their daily scrum.
        bool gate_open() const;

        CommandOutcome post_command(const TeamId &team, const Command &command,
                                    std::optional<std::int64_t> expected_version = std::nullopt);

        // `expected_day` guards against a repeated spin of the same day.
        SpinOutcome spin_day(bool override_gate = false, std::optional<int> expected_day = std::nullopt);

        std::int64_t close_sprint();

        // Session-wide facilitator note (does not change the state).
        void note(std::string text);

        Snapshot snapshot() const;

        // Called after every append, e.g. to persist the record.
        void on_append(std::function<void(const LogRecord &)> sink) { m_sink = std::move(sink); }

    private:
        LiveSession() = default;
        const LogRecord &append(std::string team, RecordKind kind, nlohmann::json payload);

        SessionState m_state;
        Journal m_journal;
        std::int64_t m_version = 0;
        Clock m_clock;
        std::function<void(const LogRecord &)> m_sink;
    };

    // Drives every team with the bot until the session is finished.
    void play_with_bots(LiveSession &session, const BotPolicy &policy);

    // formats: jsonl, csv (log), burndown-csv, leaderboard-csv.
    std::string export_session(const LiveSession &session, std::string_view format);

    nlohmann::json metrics_json(const SessionState &state);

    enum class Access { Read, Team, Facilitator };

    struct CreatedSession
    {
        SessionId id;
        std::string facilitator_token;
        std::string team_token;
        std::vector<std::string> warnings;
    };

    struct ServiceOptions
    {
        std::optional<std::filesystem::path> data_dir;
        // Snapshot after every n-th spin (0 disables snapshots).
        int snapshot_every_spins = 5;
        Clock clock = utc_now;
    };

    // Thread-safe registry of live sessions with optional persistence.
    // Writers are serialized per session; sessions are independent.
    class SessionService
    {
    public:
        explicit SessionService(ServiceOptions options = {});
        ~SessionService();

        SessionService(const SessionService &) = delete;
        SessionService &operator=(const SessionService &) = delete;

        CreatedSession create(const SessionConfig &config);

        // Throws SimError(Auth) when the token lacks the required access.
        void authorize(const SessionId &id, std::string_view token, Access access) const;

        nlohmann::json state_json(const SessionId &id) const;
        std::int64_t version(const SessionId &id) const;
        CommandOutcome post_command(const SessionId &id, const TeamId &team, const Command &command,
                                    std::optional<std::int64_t> expected_version = std::nullopt);
        SpinOutcome spin_day(const SessionId &id, bool override_gate = false, std::optional<int> expected_day = std::nullopt);
        std::int64_t close_sprint(const SessionId &id);
        void note(const SessionId &id, std::string text);
        nlohmann::json metrics(const SessionId &id) const;
        std::string export_session(const SessionId &id, std::string_view format) const;
        SessionState snapshot_state(const SessionId &id) const;

        // Blocks until the version exceeds `seen` or the timeout passes.
        std::int64_t wait_for_change(const SessionId &id, std::int64_t seen, std::chrono::milliseconds timeout) const;

        std::vector<SessionId> session_ids() const;

    private:
        struct Entry;
        std::shared_ptr<Entry> find(const SessionId &id) const;
        void load_all();
        void persist_snapshot(Entry &entry);

        ServiceOptions m_options;
        mutable std::mutex m_mutex;
        std::map<SessionId, std::shared_ptr<Entry>> m_sessions;
    };
}
