#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dfscan/protocol.hpp"
#include "dfscan/rotor.hpp"

namespace dfscan {

/// Simulated motion controller firmware. Owns a physical axis position
/// (output-shaft microsteps, zero at 0 degrees) and minimum-travel limit
/// switches; the step counters are only meaningful after HOME.
class SimulatedDevice {
public:
    struct Options {
        RotorConfig config{};
        /// Where the mechanism sits at power-up.
        AngularPose power_on_pose{0.0, 45.0};
        /// Homing increments, degrees per tick.
        double fast_increment_deg = 1.0;
        double slow_increment_deg = 0.05;
    };

    SimulatedDevice();
    explicit SimulatedDevice(Options options);

    protocol::Response apply(const protocol::Command& cmd);

    /// Parses one request line and answers with one response line.
    std::string handle_line(std::string_view line);

    const RotorState& state() const { return state_; }
    const RotorConfig& config() const { return options_.config; }

    /// Physical pointing, valid whether or not the counters are homed.
    AngularPose physical_pose() const;

    bool az_at_min() const { return phys_az_ <= min_az_; }
    bool el_at_min() const { return phys_el_ <= min_el_; }

    /// Homing ticks taken by the last HOME.
    int last_homing_ticks() const { return last_homing_ticks_; }

private:
    protocol::Response home();
    protocol::Response move(const protocol::Move& m);

    Options options_;
    RotorState state_{};
    std::int64_t phys_az_ = 0;
    std::int64_t phys_el_ = 0;
    std::int64_t min_az_ = 0;
    std::int64_t max_az_ = 0;
    std::int64_t min_el_ = 0;
    std::int64_t max_el_ = 0;
    int last_homing_ticks_ = 0;
};

} // namespace dfscan
