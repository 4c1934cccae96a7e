#pragma once

#include <cstdint>
#include <string_view>

#include "dfscan/geometry.hpp"

namespace dfscan {

enum class Axis { az, el };

std::string_view to_string(Axis axis);

/// Gear train and travel geometry of the two-axis rotor.
struct RotorConfig {
    double az_gear_ratio = 300.0 / 12.0; // herringbone, driven:driver
    double el_gear_ratio = 40.0;         // worm
    int motor_full_steps_per_rev = 200;
    int microsteps = 16;
    Interval az_travel{-90.0, 90.0};
    Interval el_travel{0.0, 80.0};
    std::int64_t az_backlash_steps = 0;
    std::int64_t el_backlash_steps = 0;
    double min_settle_s = 0.5;

    /// Throws ConfigError when any invariant is violated.
    void validate() const;

    double gear_ratio(Axis axis) const { return axis == Axis::az ? az_gear_ratio : el_gear_ratio; }
    const Interval& travel(Axis axis) const { return axis == Axis::az ? az_travel : el_travel; }
    std::int64_t backlash_steps(Axis axis) const { return axis == Axis::az ? az_backlash_steps : el_backlash_steps; }

    /// Output-shaft microsteps per degree for an axis.
    double steps_per_degree(Axis axis) const;
};

/// Quantizes an angle to output-shaft microsteps (round half away from zero).
/// Throws RangeError outside the axis travel.
std::int64_t angle_to_steps(const RotorConfig& config, Axis axis, double angle_deg);
double steps_to_angle(const RotorConfig& config, Axis axis, std::int64_t steps);

enum class HomingPhase { idle, seeking_fast, backing_off, seeking_slow, zeroed, fault };

std::string_view to_string(HomingPhase phase);

struct RotorState {
    std::int64_t az_steps = 0;
    std::int64_t el_steps = 0;
    bool homed = false;
    HomingPhase phase = HomingPhase::idle;
    /// Microsteps retreated per axis while in backing_off.
    std::int64_t az_backoff_steps = 0;
    std::int64_t el_backoff_steps = 0;

    bool operator==(const RotorState&) const = default;
};

/// Distance retreated from the switch before the slow re-approach.
constexpr double kHomingBackoffDeg = 2.0;

/// One transition of the limit-switch homing machine. `limit_hit` is the
/// combined state of the minimum-travel switches (all seeking axes pressed).
RotorState home_step(const RotorConfig& config, const RotorState& state, bool limit_hit);

/// Current pose of a homed rotor. Throws StateError unless homed.
AngularPose current_pose(const RotorConfig& config, const RotorState& state);

/// Last commanded direction per axis (-1, 0, +1), used for backlash take-up.
struct MotionHistory {
    int az_dir = 0;
    int el_dir = 0;
};

struct MovePlan {
    std::int64_t az_delta = 0;
    std::int64_t el_delta = 0;
    double settle_s = 0.0;
};

/// Relative step deltas for a move between two in-travel poses. Adds the
/// configured backlash on an axis whose direction reverses and updates
/// `history`. Throws StateError if the rotor is not homed.
MovePlan plan_move(const RotorConfig& config, const RotorState& state, const AngularPose& from,
                   const AngularPose& to, MotionHistory& history);

} // namespace dfscan
