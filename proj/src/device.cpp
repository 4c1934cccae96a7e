#include "dfscan/device.hpp"

#include <algorithm>
#include <cmath>

namespace dfscan {

using namespace protocol;

SimulatedDevice::SimulatedDevice() : SimulatedDevice(Options{}) {}

SimulatedDevice::SimulatedDevice(Options options) : options_(std::move(options))
{
    const auto& cfg = options_.config;
    cfg.validate();
    min_az_ = angle_to_steps(cfg, Axis::az, cfg.az_travel.min);
    max_az_ = angle_to_steps(cfg, Axis::az, cfg.az_travel.max);
    min_el_ = angle_to_steps(cfg, Axis::el, cfg.el_travel.min);
    max_el_ = angle_to_steps(cfg, Axis::el, cfg.el_travel.max);
    phys_az_ = angle_to_steps(cfg, Axis::az, options_.power_on_pose.az);
    phys_el_ = angle_to_steps(cfg, Axis::el, options_.power_on_pose.el);
}

AngularPose SimulatedDevice::physical_pose() const
{
    const auto& cfg = options_.config;
    return {steps_to_angle(cfg, Axis::az, phys_az_), steps_to_angle(cfg, Axis::el, phys_el_)};
}

Response SimulatedDevice::apply(const Command& cmd)
{
    if (std::holds_alternative<Home>(cmd))
        return home();
    if (const auto* m = std::get_if<Move>(&cmd))
        return move(*m);
    if (std::holds_alternative<PosQuery>(cmd)) {
        if (!state_.homed)
            return Err{ErrorCode::unhomed};
        return Pos{state_.az_steps, state_.el_steps};
    }
    if (std::holds_alternative<LimQuery>(cmd))
        return Lim{az_at_min(), el_at_min()};
    return Ok{}; // STOP: moves complete synchronously, nothing in flight
}

std::string SimulatedDevice::handle_line(std::string_view line)
{
    try {
        return encode_response(apply(parse_command(line)));
    } catch (const ProtocolError& e) {
        return encode_response(Err{e.code()});
    }
}

Response SimulatedDevice::home()
{
    const auto& cfg = options_.config;
    const auto fast_az = std::max<std::int64_t>(1, std::llround(options_.fast_increment_deg * cfg.steps_per_degree(Axis::az)));
    const auto fast_el = std::max<std::int64_t>(1, std::llround(options_.fast_increment_deg * cfg.steps_per_degree(Axis::el)));
    const auto slow_az = std::max<std::int64_t>(1, std::llround(options_.slow_increment_deg * cfg.steps_per_degree(Axis::az)));
    const auto slow_el = std::max<std::int64_t>(1, std::llround(options_.slow_increment_deg * cfg.steps_per_degree(Axis::el)));

    // Each axis stops on its own switch; the machine sees both pressed.
    auto seek = [&](std::int64_t daz, std::int64_t del) {
        phys_az_ = std::max(min_az_, phys_az_ - daz);
        phys_el_ = std::max(min_el_, phys_el_ - del);
    };

    state_ = home_step(cfg, RotorState{}, false);
    const int max_ticks = 1'000'000;
    int ticks = 1;
    while (state_.phase != HomingPhase::zeroed && ticks < max_ticks) {
        switch (state_.phase) {
        case HomingPhase::seeking_fast: seek(fast_az, fast_el); break;
        case HomingPhase::seeking_slow: seek(slow_az, slow_el); break;
        case HomingPhase::backing_off:
            phys_az_ = std::min(max_az_, phys_az_ + state_.az_backoff_steps);
            phys_el_ = std::min(max_el_, phys_el_ + state_.el_backoff_steps);
            break;
        default: break;
        }
        state_ = home_step(cfg, state_, az_at_min() && el_at_min());
        ++ticks;
    }
    last_homing_ticks_ = ticks;
    if (state_.phase != HomingPhase::zeroed)
        return Err{ErrorCode::limit_strike};
    return Ok{};
}

Response SimulatedDevice::move(const Move& m)
{
    if (!state_.homed)
        return Err{ErrorCode::unhomed};

    const std::int64_t target_az = phys_az_ + m.az_steps;
    const std::int64_t target_el = phys_el_ + m.el_steps;
    const std::int64_t az = std::clamp(target_az, min_az_, max_az_);
    const std::int64_t el = std::clamp(target_el, min_el_, max_el_);
    phys_az_ = az;
    phys_el_ = el;
    state_.az_steps = az;
    state_.el_steps = el;

    if (az != target_az || el != target_el) {
        // Unexpected switch contact after homing: the counters can no
        // longer be trusted until the next HOME.
        state_ = home_step(options_.config, state_, true);
        return Err{ErrorCode::limit_strike};
    }
    return Ok{};
}

} // namespace dfscan
