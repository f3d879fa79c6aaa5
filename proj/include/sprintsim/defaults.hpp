#pragma once

#include "sprintsim/model.hpp"

#include <vector>

namespace sprintsim
{
    // 20 equal-weight slots in ticks: hours {0,0,2,3,3,4,4,4,6x6,7,7,8,8,10,12};
    // mean exactly 5.4 h, sd 2.939 h.
    WheelConfig default_progress_wheel();

    std::vector<EventCard> default_event_deck();

    // Web-shop backlog of 328 task hours against a 300 h default capacity.
    std::vector<StoryDef> default_backlog();

    SessionConfig default_config();
}
