#include "sprintsim/chance.hpp"
#include "sprintsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sprintsim
{
    namespace
    {
        constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

        constexpr std::uint64_t mix64(std::uint64_t z) noexcept
        {
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }

        std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

        Rational make_rational(std::int64_t num, std::int64_t den)
        {
            const auto g = gcd64(num, den);
            if (g > 1)
            {
                num /= g;
                den /= g;
            }
            return {num, den};
        }
    }

    std::uint64_t RngState::peek() const noexcept
    {
        const auto lo = static_cast<std::uint64_t>(counter);
        const auto hi = static_cast<std::uint64_t>(counter >> 64);
        // Identical to the SplitMix64 sequence while the high word is zero.
        const std::uint64_t base = hi == 0 ? seed : mix64(seed ^ mix64(hi));
        return mix64(base + golden_gamma * (lo + 1));
    }

    std::uint64_t next_u64(RngState &rng) noexcept
    {
        const auto out = rng.peek();
        rng.counter += 1;
        return out;
    }

    std::uint64_t reduce(std::uint64_t raw, std::uint64_t bound) noexcept
    {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(raw) * bound) >> 64);
    }

    WheelStats moments_of(std::span<const WheelSlot> slots)
    {
        std::int64_t w = 0;
        std::int64_t s1 = 0;
        std::int64_t s2 = 0;
        for (const auto &slot : slots)
        {
            w += slot.weight;
            s1 += slot.weight * slot.value;
            s2 += slot.weight * slot.value * slot.value;
        }
        WheelStats st;
        if (w == 0)
        {
            return st;
        }
        st.exact_mean = make_rational(s1, w);
        st.exact_variance = make_rational(w * s2 - s1 * s1, w * w);
        st.mean = st.exact_mean.value();
        st.sd = std::sqrt(st.exact_variance.value());
        return st;
    }

    Wheel::Wheel(WheelConfig config) : m_config(std::move(config))
    {
        if (m_config.slots.empty())
        {
            throw SimError(ErrorCode::Configuration, "wheel has no slots");
        }
        std::int64_t running = 0;
        for (std::size_t i = 0; i < m_config.slots.size(); ++i)
        {
            const auto &slot = m_config.slots[i];
            if (slot.weight < 1)
            {
                std::ostringstream os;
                os << "wheel slot " << i << " (value " << slot.value << ") has non-positive weight " << slot.weight;
                throw SimError(ErrorCode::Configuration, os.str());
            }
            running += slot.weight;
            m_cumulative.push_back(running);
        }
        m_stats = moments_of(m_config.slots);
    }

    double Wheel::probability(std::size_t slot) const
    {
        return static_cast<double>(m_config.slots.at(slot).weight) / static_cast<double>(total_weight());
    }

    std::int64_t Wheel::max_value() const noexcept
    {
        std::int64_t m = std::numeric_limits<std::int64_t>::min();
        for (const auto &s : m_config.slots)
        {
            m = std::max(m, s.value);
        }
        return m;
    }

    Wheel build_wheel(const WheelConfig &config) { return Wheel(config); }

    WheelStats wheel_stats(const Wheel &wheel) { return wheel.stats(); }

    SpinResult spin(const Wheel &wheel, const RngState &rng)
    {
        const auto raw = rng.peek();
        const auto ticket = static_cast<std::int64_t>(reduce(raw, static_cast<std::uint64_t>(wheel.total_weight())));
        const auto &cum = wheel.cumulative();
        const auto it = std::upper_bound(cum.begin(), cum.end(), ticket);
        const auto slot = static_cast<std::size_t>(it - cum.begin());
        return {slot, wheel.slots()[slot].value, rng.advanced()};
    }

    std::size_t parameter_draws(const EventCard &card)
    {
        switch (card.kind)
        {
        case EventKind::Absence: return card.params.member ? 0 : 1;
        case EventKind::PriorityChange:
        case EventKind::ScopeCut: return card.params.story ? 0 : 1;
        case EventKind::EstimateRevision: return card.params.task ? 0 : 1;
        case EventKind::Defect:
        case EventKind::AddStory:
        case EventKind::NoEvent: return 0;
        }
        return 0;
    }

    WheelConfig event_wheel_config(std::span<const EventCard> deck)
    {
        WheelConfig config;
        for (std::size_t i = 0; i < deck.size(); ++i)
        {
            config.slots.push_back({static_cast<std::int64_t>(i), deck[i].weight});
        }
        return config;
    }

    std::pair<DayDraws, RngState> draw_day(int day, int sprint_day, int team_size, const Wheel &progress_wheel,
                                           const Wheel &event_wheel, std::span<const EventCard> deck,
                                           const RngState &rng)
    {
        if (sprint_day < 1)
        {
            throw SimError(ErrorCode::Usage, "sprint_day must be >= 1");
        }
        DayDraws draws;
        draws.day = day;
        draws.sprint_day = sprint_day;
        RngState cursor = rng;

        if (sprint_day >= 2)
        {
            const auto drawn = spin(event_wheel, cursor);
            cursor = drawn.rng;
            DrawnEvent ev;
            ev.card_index = static_cast<std::size_t>(drawn.value);
            const auto &card = deck[ev.card_index];
            ev.card_id = card.id;
            if (card.kind == EventKind::Absence)
            {
                if (card.params.member)
                {
                    ev.member = card.params.member;
                }
                else
                {
                    ev.member = 1 + static_cast<MemberIndex>(reduce(next_u64(cursor), static_cast<std::uint64_t>(team_size)));
                }
            }
            else
            {
                for (std::size_t k = 0; k < parameter_draws(card); ++k)
                {
                    ev.picks.push_back(next_u64(cursor));
                }
            }
            draws.event = std::move(ev);
        }

        for (MemberIndex m = 1; m <= team_size; ++m)
        {
            const auto drawn = spin(progress_wheel, cursor);
            cursor = drawn.rng;
            draws.progress[m] = Ticks{drawn.value};
        }
        draws.rng_steps = static_cast<std::uint64_t>(cursor.counter - rng.counter);
        return {std::move(draws), cursor};
    }

    namespace
    {
        struct Search
        {
            std::vector<std::int64_t> values;
            int n = 0;
            double mu = 0;
            double sigma = 0;
            double best_err = std::numeric_limits<double>::infinity();
            std::vector<int> best_counts;
            std::vector<int> counts;
            std::uint64_t nodes = 0;

            double error_of(std::int64_t s, std::int64_t q) const
            {
                const double mean = static_cast<double>(s) / n;
                const double var = std::max(0.0, static_cast<double>(q) / n - mean * mean);
                return std::max(std::abs(mean - mu), std::abs(std::sqrt(var) - sigma));
            }

            // True when no completion of the partial multiset can beat best_err.
            bool hopeless(std::size_t i, int r, std::int64_t s, std::int64_t q) const
            {
                if (!std::isfinite(best_err))
                {
                    return false;
                }
                const auto vmin = values[i];
                const auto vmax = values.back();
                const double smin = static_cast<double>(s + r * vmin);
                const double smax = static_cast<double>(s + r * vmax);
                const double t = best_err;
                const double lo = n * (mu - t);
                const double hi = n * (mu + t);
                if (smax < lo || smin > hi)
                {
                    return true;
                }
                const double wlo = std::max(lo, smin);
                const double whi = std::min(hi, smax);
                const double sd_lo = std::max(0.0, sigma - t);
                const double sd_hi = sigma + t;
                const double qlo = n * sd_lo * sd_lo + std::max(0.0, wlo) * std::max(0.0, wlo) / n;
                const double qhi = n * sd_hi * sd_hi + whi * whi / n;
                const double qmin = static_cast<double>(q + r * vmin * vmin);
                const double qmax = static_cast<double>(q + r * vmax * vmax);
                return qmax < qlo || qmin > qhi;
            }

            void dfs(std::size_t i, int r, std::int64_t s, std::int64_t q)
            {
                ++nodes;
                const std::size_t last = values.size() - 1;
                if (i == last)
                {
                    if (r < 1 && last != 0)
                    {
                        return;
                    }
                    counts[i] = r;
                    const auto fs = s + r * values[i];
                    const auto fq = q + r * values[i] * values[i];
                    const double err = error_of(fs, fq);
                    if (err < best_err)
                    {
                        best_err = err;
                        best_counts = counts;
                    }
                    counts[i] = 0;
                    return;
                }
                if (hopeless(i, r, s, q))
                {
                    return;
                }
                // The smallest value must appear; the largest is reserved one slot.
                const int min_c = i == 0 ? 1 : 0;
                const int max_c = r - 1;
                for (int c = min_c; c <= max_c; ++c)
                {
                    counts[i] = c;
                    dfs(i + 1, r - c, s + c * values[i], q + c * values[i] * values[i]);
                }
                counts[i] = 0;
            }
        };
    }

    CalibrationResult calibrate_wheel(const CalibrationRequest &request)
    {
        if (request.slot_count < 1 || request.slot_count > 24)
        {
            throw SimError(ErrorCode::Usage, "slot count must be within 1..24");
        }
        std::vector<std::int64_t> values = request.values;
        if (values.empty())
        {
            for (std::int64_t v = 0; v <= 12; ++v)
            {
                values.push_back(v);
            }
        }
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.size() >= 2 && request.slot_count < 2)
        {
            throw SimError(ErrorCode::NoSolution, "a single slot cannot hold both extreme values");
        }

        Search search;
        search.values = values;
        search.n = request.slot_count;
        search.mu = request.target_mean;
        search.sigma = request.target_sd;
        search.counts.assign(values.size(), 0);
        search.dfs(0, request.slot_count, 0, 0);

        CalibrationResult result;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            for (int c = 0; c < search.best_counts[i]; ++c)
            {
                result.config.slots.push_back({values[i], 1});
            }
        }
        result.stats = moments_of(result.config.slots);
        if (!(search.best_err <= request.tolerance))
        {
            std::ostringstream os;
            os << "no " << request.slot_count << "-slot wheel reaches mean " << request.target_mean << " and sd "
               << request.target_sd << " within " << request.tolerance << "; nearest achieved mean "
               << result.stats.mean << ", sd " << result.stats.sd;
            throw SimError(ErrorCode::NoSolution, os.str());
        }
        return result;
    }
}
