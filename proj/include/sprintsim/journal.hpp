#pragma once

// Append-only, hash-chained session log. The log is the source of truth:
// snapshots are an optimization and replay rebuilds any state from it.

#include "sprintsim/engine.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sprintsim
{
    enum class RecordKind { Command, Draws, Advance, EventApplied, Note };

    NLOHMANN_JSON_SERIALIZE_ENUM(RecordKind, {{RecordKind::Command, "Command"}, {RecordKind::Draws, "Draws"}, {RecordKind::Advance, "Advance"}, {RecordKind::EventApplied, "EventApplied"}, {RecordKind::Note, "Note"}})

    // Records of these kinds change the session state; each bumps the version.
    constexpr bool changes_state(RecordKind k)
    {
        return k == RecordKind::Command || k == RecordKind::Draws || k == RecordKind::Advance;
    }

    struct LogRecord
    {
        std::int64_t seq = 0;
        std::string wall_time;
        int day = 0;
        // Team id, or "session" for session-wide records.
        std::string team = "session";
        RecordKind kind = RecordKind::Note;
        nlohmann::json payload;
        // sha256(previous hash || canonical body), lowercase hex.
        std::string hash;
    };

    inline const std::string genesis_hash(64, '0');

    std::string sha256_hex(std::string_view data);

    // Canonical JSON of the record without its hash field.
    std::string record_body(const LogRecord &record);
    std::string chain_hash(std::string_view previous, const LogRecord &record);

    nlohmann::json record_json(const LogRecord &record);
    LogRecord record_from_json(const nlohmann::json &j);

    class Journal
    {
    public:
        // Assigns the next sequence number and chains the hash.
        const LogRecord &append(LogRecord record);

        const std::vector<LogRecord> &records() const noexcept { return m_records; }
        std::int64_t last_seq() const noexcept { return m_records.empty() ? 0 : m_records.back().seq; }
        const std::string &last_hash() const noexcept { return m_records.empty() ? genesis_hash : m_records.back().hash; }

        // Adopts records that were already verified.
        static Journal from_records(std::vector<LogRecord> records);

    private:
        std::vector<LogRecord> m_records;
    };

    // Checks dense sequence numbers from 1 and the hash chain; throws
    // SimError(Integrity) naming the first bad record.
    void verify_chain(std::span<const LogRecord> records);

    // Parses JSON lines. A final line without a trailing newline is treated
    // as a torn write and dropped when `tolerate_torn_tail` is set.
    std::vector<LogRecord> parse_jsonl(std::string_view text, bool tolerate_torn_tail = false);
    std::string to_jsonl(std::span<const LogRecord> records);

    // State-changing records as engine replay steps (notes are skipped).
    std::vector<ReplayStep> replay_steps(std::span<const LogRecord> records);

    // Verifies the chain (and the config fingerprint on the creation record)
    // and rebuilds the state, optionally stopping after `through_seq`.
    SessionState replay_log(const SessionConfig &config, std::span<const LogRecord> records,
                            std::optional<std::int64_t> through_seq = std::nullopt);

    std::string config_fingerprint(const SessionConfig &config);
}
