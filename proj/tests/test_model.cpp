#include "doctest.h"
#include "support.hpp"

#include "sprintsim/error.hpp"
#include "sprintsim/serialize.hpp"

#include <fstream>
#include <sstream>

using namespace sprintsim;
using namespace sprintsim::testing;

namespace
{
    bool has_rule(const std::vector<Violation> &v, std::string_view needle)
    {
        return std::any_of(v.begin(), v.end(), [&](const Violation &x) { return x.rule.find(needle) != std::string::npos; });
    }
}

TEST_CASE("shipped default config is valid")
{
    CHECK(validate_config(default_config()).empty());
}

TEST_CASE("configs/default.json is the built-in default")
{
    std::ifstream in(SPRINTSIM_SOURCE_DIR "/configs/default.json");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(parse_config(ss.str()) == default_config());
}

TEST_CASE("shipped specialist config is valid")
{
    std::ifstream in(SPRINTSIM_SOURCE_DIR "/configs/specialist.json");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(validate_config(parse_config(ss.str())).empty());
}

TEST_CASE("mutual dependency is a cycle violation")
{
    auto c = small_config({story("A", 3, Priority::Must, {4}, {"B"}), story("B", 3, Priority::Must, {4}, {"A"})});
    const auto v = validate_config(c);
    CHECK(has_rule(v, "cycle"));
}

TEST_CASE("member indices with a gap are rejected")
{
    auto c = default_config();
    c.team_size = 5;
    for (int i : {1, 2, 3, 5, 6})
    {
        c.members.push_back({i, "M" + std::to_string(i), generalist_role});
    }
    CHECK(has_rule(validate_config(c), "without gaps"));
}

TEST_CASE("field ranges")
{
    auto c = default_config();
    c.team_size = 13;
    CHECK_FALSE(validate_config(c).empty());
    c = default_config();
    c.team_count = 0;
    CHECK_FALSE(validate_config(c).empty());
    c = default_config();
    c.progress_wheel.slots.push_back({-1, 1});
    CHECK_FALSE(validate_config(c).empty());
    c = default_config();
    c.backlog.push_back(story("S1", 1, Priority::Must, {2}));
    CHECK(has_rule(validate_config(c), "duplicate"));
    c = default_config();
    c.backlog.push_back(story(quality_story_id, 1, Priority::Must, {2}));
    CHECK_FALSE(validate_config(c).empty());
    c = default_config();
    c.backlog[3].depends_on.push_back("NOPE");
    CHECK_FALSE(validate_config(c).empty());
    c = default_config();
    c.event_deck.clear();
    CHECK_FALSE(validate_config(c).empty());
}

TEST_CASE("soft warnings do not invalidate")
{
    auto c = default_config();
    c.sprint_length_days = 5;
    c.team_size = 3;
    CHECK(validate_config(c).empty());
    CHECK(config_warnings(c).size() >= 2);
}

TEST_CASE("ticks are exact half hours")
{
    CHECK(Ticks::from_hours(6).count() == 12);
    CHECK((Ticks{3} + Ticks{4}).hours() == doctest::Approx(3.5));
    CHECK(Ticks{5} * 3 == Ticks{15});
    CHECK(Ticks{1} < Ticks{2});
}

TEST_CASE("topological order puts dependencies first")
{
    auto s = init_session(default_config());
    const auto order = topological_order(s.teams.at("T1").stories);
    REQUIRE(order);
    std::map<StoryId, std::size_t> pos;
    for (std::size_t i = 0; i < order->size(); ++i)
    {
        pos[(*order)[i]] = i;
    }
    for (const auto &[id, st] : s.teams.at("T1").stories)
    {
        for (const auto &d : st.depends_on)
        {
            CHECK(pos[d] < pos[id]);
        }
    }
}

TEST_CASE("config survives a JSON round trip")
{
    std::mt19937_64 gen(11);
    for (int i = 0; i < 20; ++i)
    {
        const auto c = random_config(gen);
        CHECK(parse_config(json(c).dump()) == c);
    }
}

TEST_CASE("malformed config text is a validation error")
{
    try
    {
        parse_config("{not json");
        FAIL("expected an error");
    }
    catch (const SimError &e)
    {
        CHECK(e.code() == ErrorCode::Validation);
    }
}

TEST_CASE("roles held by no member produce a warning")
{
    auto c = small_config({story("A", 3, Priority::Must, {4})});
    c.backlog[0].tasks[0].required_role = "tester";
    const auto w = config_warnings(c);
    CHECK(std::any_of(w.begin(), w.end(), [](const std::string &s) { return s.find("tester") != std::string::npos; }));
}
