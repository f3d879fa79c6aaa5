#include "sprintsim/journal.hpp"
#include "sprintsim/error.hpp"
#include "sprintsim/serialize.hpp"

#include <openssl/evp.h>

#include <array>

namespace sprintsim
{
    std::string sha256_hex(std::string_view data)
    {
        std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
        unsigned int len = 0;
        if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        {
            throw SimError(ErrorCode::Internal, "sha256 failed");
        }
        static constexpr char hex[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i)
        {
            out.push_back(hex[digest[i] >> 4]);
            out.push_back(hex[digest[i] & 0xF]);
        }
        return out;
    }

    namespace
    {
        json body_json(const LogRecord &r)
        {
            return {{"seq", r.seq}, {"wall_time", r.wall_time}, {"day", r.day},
                    {"team", r.team}, {"kind", r.kind}, {"payload", r.payload}};
        }
    }

    std::string record_body(const LogRecord &record) { return body_json(record).dump(); }

    std::string chain_hash(std::string_view previous, const LogRecord &record)
    {
        std::string data(previous);
        data += record_body(record);
        return sha256_hex(data);
    }

    json record_json(const LogRecord &record)
    {
        json j = body_json(record);
        j["hash"] = record.hash;
        return j;
    }

    LogRecord record_from_json(const json &j)
    {
        LogRecord r;
        r.seq = j.at("seq").get<std::int64_t>();
        r.wall_time = j.at("wall_time").get<std::string>();
        r.day = j.at("day").get<int>();
        r.team = j.at("team").get<std::string>();
        r.kind = j.at("kind").get<RecordKind>();
        r.payload = j.at("payload");
        r.hash = j.at("hash").get<std::string>();
        return r;
    }

    const LogRecord &Journal::append(LogRecord record)
    {
        record.seq = last_seq() + 1;
        record.hash = chain_hash(last_hash(), record);
        m_records.push_back(std::move(record));
        return m_records.back();
    }

    Journal Journal::from_records(std::vector<LogRecord> records)
    {
        Journal j;
        j.m_records = std::move(records);
        return j;
    }

    void verify_chain(std::span<const LogRecord> records)
    {
        std::string prev = genesis_hash;
        std::int64_t expected = 1;
        for (const auto &r : records)
        {
            if (r.seq != expected)
            {
                throw SimError(ErrorCode::Integrity, "integrity error at seq " + std::to_string(r.seq) + ": expected seq " +
                                                         std::to_string(expected));
            }
            if (chain_hash(prev, r) != r.hash)
            {
                throw SimError(ErrorCode::Integrity, "integrity error at seq " + std::to_string(r.seq) + ": hash mismatch");
            }
            prev = r.hash;
            ++expected;
        }
    }

    std::vector<LogRecord> parse_jsonl(std::string_view text, bool tolerate_torn_tail)
    {
        std::vector<LogRecord> out;
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos < text.size())
        {
            const auto nl = text.find('\n', pos);
            const bool torn = nl == std::string_view::npos;
            const auto line = text.substr(pos, torn ? std::string_view::npos : nl - pos);
            pos = torn ? text.size() : nl + 1;
            ++line_no;
            if (line.empty())
            {
                continue;
            }
            try
            {
                out.push_back(record_from_json(json::parse(line)));
            }
            catch (const json::exception &e)
            {
                if (torn && tolerate_torn_tail)
                {
                    break;
                }
                throw SimError(ErrorCode::Integrity, "integrity error: unreadable log line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        return out;
    }

    std::string to_jsonl(std::span<const LogRecord> records)
    {
        std::string out;
        for (const auto &r : records)
        {
            out += record_json(r).dump();
            out += '\n';
        }
        return out;
    }

    std::vector<ReplayStep> replay_steps(std::span<const LogRecord> records)
    {
        std::vector<ReplayStep> steps;
        for (const auto &r : records)
        {
            try
            {
                switch (r.kind)
                {
                case RecordKind::Command:
                    steps.push_back({r.seq, ReplayCommand{r.team, r.payload.at("command").get<Command>()}});
                    break;
                case RecordKind::Draws:
                    steps.push_back({r.seq, ReplayDraws{r.payload.at("draws").get<DayDraws>()}});
                    break;
                case RecordKind::Advance:
                    steps.push_back({r.seq, ReplayCloseSprint{}});
                    break;
                case RecordKind::EventApplied:
                case RecordKind::Note:
                    break;
                }
            }
            catch (const json::exception &e)
            {
                throw SimError(ErrorCode::Integrity, "integrity error at seq " + std::to_string(r.seq) + ": bad payload: " + e.what());
            }
            catch (const SimError &e)
            {
                throw SimError(ErrorCode::Integrity, "integrity error at seq " + std::to_string(r.seq) + ": " + e.what());
            }
        }
        return steps;
    }

    std::string config_fingerprint(const SessionConfig &config) { return sha256_hex(json(config).dump()); }

    SessionState replay_log(const SessionConfig &config, std::span<const LogRecord> records,
                            std::optional<std::int64_t> through_seq)
    {
        verify_chain(records);
        if (!records.empty())
        {
            const auto &first = records.front();
            if (first.kind == RecordKind::Note && first.payload.contains("config_sha256") &&
                first.payload["config_sha256"].get<std::string>() != config_fingerprint(config))
            {
                throw SimError(ErrorCode::Integrity, "integrity error at seq 1: log was recorded with a different config");
            }
        }
        std::size_t count = records.size();
        if (through_seq)
        {
            count = 0;
            while (count < records.size() && records[count].seq <= *through_seq)
            {
                ++count;
            }
        }
        const auto steps = replay_steps(records.first(count));
        return replay(config, steps);
    }
}
