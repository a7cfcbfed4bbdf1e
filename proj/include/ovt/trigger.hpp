#pragma once

#include "ovt/signal_model.hpp"

#include <cstddef>
#include <optional>

namespace ovt {

// Activation rule of the event logger. A frame fires when the lane change
// flag is active and speed, gap and relative speed pass their thresholds,
// all compared strictly ("more than" / "less than"); boundary values do not
// fire.
struct TriggerRule {
    double min_speed = 50.0;      // km/h, vehicle_speed must exceed
    double max_dist_ahead = 200.0; // m, dist_ahead must stay under
    double min_rel_speed = 0.1;   // km/h, rel_speed_left_wheel must exceed
    bool lane_change_required = true;

    bool matches(const SignalFrame& frame) const {
        return (!lane_change_required || frame.lane_change_status == 1) &&
               frame.vehicle_speed > min_speed && frame.dist_ahead < max_dist_ahead &&
               frame.rel_speed_left_wheel > min_rel_speed;
    }
};

// Index of the first frame satisfying the rule, or nullopt when none does.
std::optional<std::size_t> detect_trigger(const Recording& rec, const TriggerRule& rule = {});

// Copy of rec with trigger_index filled in. Throws NoTriggerFound when no
// frame qualifies and AlreadyAnnotated when rec already carries an index.
Recording annotate_trigger(const Recording& rec, const TriggerRule& rule = {});

} // namespace ovt
