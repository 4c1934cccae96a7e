#include "dfscan/rotor.hpp"

#include <cmath>
#include <sstream>

#include "dfscan/error.hpp"

namespace dfscan {

std::string_view to_string(Axis axis)
{
    return axis == Axis::az ? "az" : "el";
}

std::string_view to_string(HomingPhase phase)
{
    switch (phase) {
    case HomingPhase::idle: return "idle";
    case HomingPhase::seeking_fast: return "seeking_fast";
    case HomingPhase::backing_off: return "backing_off";
    case HomingPhase::seeking_slow: return "seeking_slow";
    case HomingPhase::zeroed: return "zeroed";
    case HomingPhase::fault: return "fault";
    }
    return "?";
}

void RotorConfig::validate() const
{
    if (!(az_gear_ratio > 0.0) || !(el_gear_ratio > 0.0))
        throw ConfigError("gear ratios must be positive");
    if (motor_full_steps_per_rev <= 0 || microsteps <= 0)
        throw ConfigError("motor steps per revolution and microsteps must be positive");
    if (!(az_travel.min < az_travel.max) || !(el_travel.min < el_travel.max))
        throw ConfigError("travel intervals must satisfy min < max");
    if (az_backlash_steps < 0 || el_backlash_steps < 0)
        throw ConfigError("backlash steps must be non-negative");
    if (!(min_settle_s >= 0.0))
        throw ConfigError("settle time must be non-negative");
}

double RotorConfig::steps_per_degree(Axis axis) const
{
    return static_cast<double>(motor_full_steps_per_rev) * microsteps * gear_ratio(axis) / 360.0;
}

std::int64_t angle_to_steps(const RotorConfig& config, Axis axis, double angle_deg)
{
    const auto& travel = config.travel(axis);
    if (!std::isfinite(angle_deg) || !travel.contains(angle_deg)) {
        std::ostringstream msg;
        msg << to_string(axis) << " angle " << angle_deg << " deg outside travel [" << travel.min << ", "
            << travel.max << "]";
        throw RangeError(msg.str());
    }
    // std::llround rounds half away from zero.
    const double revs = angle_deg / 360.0;
    return std::llround(revs * config.motor_full_steps_per_rev * config.microsteps * config.gear_ratio(axis));
}

double steps_to_angle(const RotorConfig& config, Axis axis, std::int64_t steps)
{
    const double per_rev = static_cast<double>(config.motor_full_steps_per_rev) * config.microsteps *
                           config.gear_ratio(axis);
    return static_cast<double>(steps) * 360.0 / per_rev;
}

RotorState home_step(const RotorConfig& config, const RotorState& state, bool limit_hit)
{
    RotorState next = state;
    switch (state.phase) {
    case HomingPhase::idle:
        next.homed = false;
        next.phase = HomingPhase::seeking_fast;
        break;
    case HomingPhase::seeking_fast:
        if (limit_hit) {
            next.phase = HomingPhase::backing_off;
            next.az_backoff_steps = std::llround(kHomingBackoffDeg * config.steps_per_degree(Axis::az));
            next.el_backoff_steps = std::llround(kHomingBackoffDeg * config.steps_per_degree(Axis::el));
        }
        break;
    case HomingPhase::backing_off:
        // Retreat is complete once the switch has released; otherwise
        // another back-off increment is taken.
        if (!limit_hit)
            next.phase = HomingPhase::seeking_slow;
        break;
    case HomingPhase::seeking_slow:
        if (limit_hit) {
            next.phase = HomingPhase::zeroed;
            next.homed = true;
            next.az_steps = angle_to_steps(config, Axis::az, config.az_travel.min);
            next.el_steps = angle_to_steps(config, Axis::el, config.el_travel.min);
            next.az_backoff_steps = 0;
            next.el_backoff_steps = 0;
        }
        break;
    case HomingPhase::zeroed:
        if (limit_hit) {
            next.phase = HomingPhase::fault;
            next.homed = false;
        }
        break;
    case HomingPhase::fault:
        break;
    }
    return next;
}

AngularPose current_pose(const RotorConfig& config, const RotorState& state)
{
    if (!state.homed)
        throw StateError("rotor pose is undefined until homed");
    return {steps_to_angle(config, Axis::az, state.az_steps), steps_to_angle(config, Axis::el, state.el_steps)};
}

namespace {

std::int64_t with_backlash(std::int64_t delta, std::int64_t backlash, int& last_dir)
{
    if (delta == 0)
        return 0;
    const int dir = delta > 0 ? 1 : -1;
    const bool reversed = last_dir != 0 && dir != last_dir;
    last_dir = dir;
    return reversed ? delta + dir * backlash : delta;
}

} // namespace

MovePlan plan_move(const RotorConfig& config, const RotorState& state, const AngularPose& from,
                   const AngularPose& to, MotionHistory& history)
{
    if (!state.homed)
        throw StateError("cannot plan a move on an unhomed rotor");

    const auto az0 = angle_to_steps(config, Axis::az, from.az);
    const auto az1 = angle_to_steps(config, Axis::az, to.az);
    const auto el0 = angle_to_steps(config, Axis::el, from.el);
    const auto el1 = angle_to_steps(config, Axis::el, to.el);

    MovePlan plan;
    plan.az_delta = with_backlash(az1 - az0, config.az_backlash_steps, history.az_dir);
    plan.el_delta = with_backlash(el1 - el0, config.el_backlash_steps, history.el_dir);
    plan.settle_s = config.min_settle_s;
    return plan;
}

} // namespace dfscan
