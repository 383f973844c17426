#pragma once

#include "patrol/gridmap.hpp"
#include "patrol/statereward.hpp"

namespace patrol {

// One experience tuple, pooled across drones for training.
struct Transition {
    StateVector s{};
    Action u = Action::Stay;
    double r = 0.0;
    StateVector s_next{};
    ActionMask feasible_next{};  // Stay is always feasible
};

}  // namespace patrol
