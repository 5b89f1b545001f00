#pragma once

#include <algorithm>

#include "flpl/error.hpp"

namespace flpl {

// Lagrangian dual variables for the attacker's two constraints: the stealth
// distance of the malicious model and the total-distance budget of the
// selected benign models. Projected subgradient updates keep both
// multipliers non-negative.
struct DualState {
    double stealth_multiplier = 0.1;  // price on d(malicious, global) <= stealth_threshold
    double selection_multiplier = 0.1; // price on sum of selected distances <= selection_budget
    double step_size = 0.01;
    double stealth_threshold = 1.0;
    double selection_budget = 1.0;
};

inline DualState update_duals(double malicious_distance, double selected_distance_sum, DualState s) {
    detail::require(malicious_distance >= 0.0 && selected_distance_sum >= 0.0,
                    "update_duals: distances must be non-negative");
    s.stealth_multiplier =
        std::max(0.0, s.stealth_multiplier - s.step_size * (malicious_distance - s.stealth_threshold));
    s.selection_multiplier =
        std::max(0.0, s.selection_multiplier - s.step_size * (selected_distance_sum - s.selection_budget));
    return s;
}

} // namespace flpl
