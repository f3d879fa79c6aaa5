#include "sprintsim/defaults.hpp"

#include <initializer_list>

namespace sprintsim
{
    WheelConfig default_progress_wheel()
    {
        WheelConfig w;
        for (int hours : {0, 0, 2, 3, 3, 4, 4, 4, 6, 6, 6, 6, 6, 6, 7, 7, 8, 8, 10, 12})
        {
            w.slots.push_back({Ticks::from_hours(hours).count(), 1});
        }
        return w;
    }

    std::vector<EventCard> default_event_deck()
    {
        std::vector<EventCard> deck;
        auto add = [&](std::string id, std::string title, EventKind kind, std::int64_t weight, auto &&tweak)
        {
            EventCard c;
            c.id = std::move(id);
            c.title = std::move(title);
            c.kind = kind;
            c.weight = weight;
            tweak(c.params);
            deck.push_back(std::move(c));
        };
        auto none = [](EventParams &) {};

        add("quiet", "Business as usual", EventKind::NoEvent, 4, none);
        add("defect", "A critical defect is reported", EventKind::Defect, 2,
            [](EventParams &p) { p.hours = Ticks::from_hours(6); });
        add("new-story", "A new 10-points user story is requested", EventKind::AddStory, 1,
            [](EventParams &p)
            {
                p.points = 10;
                p.priority = Priority::Should;
                p.task_estimates = {Ticks::from_hours(8), Ticks::from_hours(8), Ticks::from_hours(8), Ticks::from_hours(6)};
            });
        add("absence", "A team member must be absent for 3 days", EventKind::Absence, 1,
            [](EventParams &p) { p.duration_days = 3; });
        add("reprioritize", "A stakeholder escalates a story to Must", EventKind::PriorityChange, 1,
            [](EventParams &p) { p.priority = Priority::Must; });
        add("descope", "The product owner descopes a committed story", EventKind::ScopeCut, 1, none);
        add("harder", "A task turns out harder than estimated", EventKind::EstimateRevision, 1,
            [](EventParams &p) { p.delta = Ticks::from_hours(4); });
        return deck;
    }

    std::vector<StoryDef> default_backlog()
    {
        struct Row
        {
            const char *id;
            const char *title;
            StoryKind kind;
            int points;
            Priority priority;
            std::vector<StoryId> deps;
            std::vector<int> hours;
        };
        const std::vector<Row> rows = {
            {"S1", "User login", StoryKind::User, 5, Priority::Must, {}, {8, 8, 6, 4}},
            {"S2", "Product catalogue", StoryKind::User, 8, Priority::Must, {}, {10, 8, 8, 6}},
            {"S3", "Shopping cart", StoryKind::User, 8, Priority::Must, {"S2"}, {8, 8, 8, 6}},
            {"S4", "Checkout", StoryKind::User, 8, Priority::Must, {"S1", "S3", "T3"}, {10, 8, 8, 8}},
            {"S5", "Order history", StoryKind::User, 5, Priority::Should, {"S4"}, {8, 6, 6}},
            {"S6", "Product search", StoryKind::User, 5, Priority::Should, {"S2"}, {8, 8, 4}},
            {"S7", "Wish list", StoryKind::User, 3, Priority::Could, {"S1", "S2"}, {6, 6}},
            {"S8", "Product reviews", StoryKind::User, 5, Priority::Could, {"S2"}, {8, 6, 6}},
            {"S9", "Admin dashboard", StoryKind::User, 5, Priority::Should, {"S1"}, {8, 8, 6}},
            {"S10", "Password reset", StoryKind::User, 3, Priority::Should, {"S1"}, {6, 4}},
            {"S11", "Recommendations", StoryKind::User, 8, Priority::Could, {"S6"}, {10, 10, 8}},
            {"S12", "Newsletter sign-up", StoryKind::User, 2, Priority::Could, {}, {4, 4}},
            {"T1", "CI pipeline", StoryKind::Technical, 3, Priority::Must, {}, {8, 6}},
            {"T2", "Database schema", StoryKind::Technical, 5, Priority::Must, {}, {8, 8, 6}},
            {"T3", "Payment gateway integration", StoryKind::Technical, 5, Priority::Must, {"T2"}, {10, 8}},
            {"T4", "Performance test harness", StoryKind::Technical, 3, Priority::Could, {}, {6, 6}},
        };
        std::vector<StoryDef> out;
        for (const auto &r : rows)
        {
            StoryDef s;
            s.id = r.id;
            s.title = r.title;
            s.kind = r.kind;
            s.points = r.points;
            s.priority = r.priority;
            s.depends_on = r.deps;
            for (std::size_t k = 0; k < r.hours.size(); ++k)
            {
                s.tasks.push_back({s.id + "-T" + std::to_string(k + 1), Ticks::from_hours(r.hours[k]), std::nullopt});
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    SessionConfig default_config()
    {
        SessionConfig c;
        c.team_count = 2;
        c.team_size = 5;
        c.sprint_length_days = 10;
        c.sprint_count = 1;
        c.nominal_per_day = Ticks::from_hours(6);
        c.progress_wheel = default_progress_wheel();
        c.event_deck = default_event_deck();
        c.backlog = default_backlog();
        c.seed = 2024;
        return c;
    }
}
