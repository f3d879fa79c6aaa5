#pragma once

// Weighted lotteries: the progress wheel, the event wheel, exact moments,
// calibration search, and the per-day draw bundle shared by all teams.

#include "sprintsim/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sprintsim
{
    // Counter-based generator: output n is the SplitMix64 finalizer applied to
    // (seed, n). The state is a value; advancing returns a new state.
    struct RngState
    {
        std::uint64_t seed = 0;
        unsigned __int128 counter = 0;

        std::uint64_t peek() const noexcept;
        RngState advanced(std::uint64_t steps = 1) const noexcept { return {seed, counter + steps}; }

        bool operator==(const RngState &) const = default;
    };

    // Draws one value and advances the state in place.
    std::uint64_t next_u64(RngState &rng) noexcept;

    // Maps a raw 64-bit draw onto [0, bound) (multiply-shift reduction).
    std::uint64_t reduce(std::uint64_t raw, std::uint64_t bound) noexcept;

    struct Rational
    {
        std::int64_t num = 0;
        std::int64_t den = 1;

        double value() const { return static_cast<double>(num) / static_cast<double>(den); }
        bool operator==(const Rational &) const = default;
    };

    struct WheelStats
    {
        double mean = 0.0;
        double sd = 0.0;
        Rational exact_mean;
        Rational exact_variance;
    };

    class Wheel
    {
    public:
        // Throws SimError(Configuration) naming the first offending slot.
        explicit Wheel(WheelConfig config);

        const std::vector<WheelSlot> &slots() const noexcept { return m_config.slots; }
        const std::vector<std::int64_t> &cumulative() const noexcept { return m_cumulative; }
        std::int64_t total_weight() const noexcept { return m_cumulative.back(); }
        const WheelStats &stats() const noexcept { return m_stats; }
        const WheelConfig &config() const noexcept { return m_config; }

        double probability(std::size_t slot) const;
        std::int64_t max_value() const noexcept;

    private:
        WheelConfig m_config;
        std::vector<std::int64_t> m_cumulative;
        WheelStats m_stats;
    };

    Wheel build_wheel(const WheelConfig &config);

    // Exact population moments in the wheel's own value unit.
    WheelStats wheel_stats(const Wheel &wheel);

    // Recomputes moments from a slot list (used to verify cached values).
    WheelStats moments_of(std::span<const WheelSlot> slots);

    struct SpinResult
    {
        std::size_t slot = 0;
        std::int64_t value = 0;
        RngState rng;
    };

    // Inverse-CDF lookup on the next generator output; consumes one step.
    SpinResult spin(const Wheel &wheel, const RngState &rng);

    // The event drawn for a day, with its parameter draws. `params` holds raw
    // generator outputs; each team resolves selectors against its own board
    // so every team receives identical inputs.
    struct DrawnEvent
    {
        std::size_t card_index = 0;
        std::string card_id;
        std::optional<MemberIndex> member;
        std::vector<std::uint64_t> picks;

        bool operator==(const DrawnEvent &) const = default;
    };

    struct DayDraws
    {
        int day = 1;
        int sprint_day = 1;
        std::optional<DrawnEvent> event;
        std::map<MemberIndex, Ticks> progress;
        // Generator steps consumed producing this bundle.
        std::uint64_t rng_steps = 0;

        bool operator==(const DayDraws &) const = default;
    };

    // Number of parameter draws a card consumes after the card draw itself.
    std::size_t parameter_draws(const EventCard &card);

    // Event wheel over a deck: slot value = deck position, weight = card weight.
    WheelConfig event_wheel_config(std::span<const EventCard> deck);

    // Canonical draw order: event card, its parameters, then progress for
    // members 1..team_size. No event on the first day of a sprint.
    std::pair<DayDraws, RngState> draw_day(int day, int sprint_day, int team_size, const Wheel &progress_wheel,
                                           const Wheel &event_wheel, std::span<const EventCard> deck,
                                           const RngState &rng);

    struct CalibrationRequest
    {
        double target_mean = 5.4;
        double target_sd = 2.9;
        int slot_count = 20;
        std::vector<std::int64_t> values;  // defaults to 0..12 when empty
        double tolerance = 0.05;
    };

    struct CalibrationResult
    {
        // One weight-1 slot per entry, values ascending.
        WheelConfig config;
        WheelStats stats;
    };

    // Exhaustive branch-and-bound over slot multisets that contain both the
    // smallest and largest allowed values. Among feasible multisets returns
    // the one with the smallest max(|mean error|, |sd error|), ties broken by
    // the lexicographically smallest count vector. Throws SimError(NoSolution)
    // with the nearest achieved moments when nothing fits the tolerance.
    CalibrationResult calibrate_wheel(const CalibrationRequest &request);
}
