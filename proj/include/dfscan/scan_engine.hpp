#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dfscan/heatmap.hpp"
#include "dfscan/rf_scene.hpp"
#include "dfscan/rotor.hpp"
#include "dfscan/sdr.hpp"
#include "dfscan/transport.hpp"

namespace dfscan {

/// Shortest dwell that keeps rotor vibration out of the measurement.
constexpr double kMinSettleS = 0.5;

/// Contiguous hops of `hop_bandwidth_hz` covering `band`, centered at
/// low + (k + 1/2) * hop_bandwidth. Throws ConfigError (with suggested
/// bandwidths) unless the band is an integer number of hops.
std::vector<CaptureRequest> build_hop_plan(const Band& band, double hop_bandwidth_hz, double hop_duration_s);

struct ScanPlan {
    Interval az_range{-90.0, 90.0};
    Interval el_range{0.0, 80.0};
    int az_pixels = 1;
    int el_pixels = 1;
    std::vector<CaptureRequest> hops;
    double settle_s = kMinSettleS;
    /// Permits settle below kMinSettleS.
    bool unsafe_settle = false;
    std::string band_label;

    /// Throws ConfigError on any violated invariant.
    void validate() const;

    AngularPose pixel_pose(int i_az, int i_el) const
    {
        return {pixel_center(az_range, az_pixels, i_az), pixel_center(el_range, el_pixels, i_el)};
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(az_pixels) * el_pixels; }
};

struct PixelIndex {
    int i_az = 0;
    int i_el = 0;
    bool operator==(const PixelIndex&) const = default;
};

/// Serpentine order: elevation rows ascending, azimuth direction
/// alternating per row.
std::vector<PixelIndex> pixel_order(const ScanPlan& plan);

/// Hop indices for the `pixel_index`-th acquired pixel: ascending when
/// even, descending when odd.
std::vector<std::size_t> hop_order(const ScanPlan& plan, std::size_t pixel_index);

/// Seconds per pixel: the settle clock runs while the hops are captured.
double pixel_duration(const ScanPlan& plan);

/// Total scan time, slew excluded.
double estimate_duration(const ScanPlan& plan);

/// Linear power sum of dBm values. Throws DomainError on empty input.
double integrate_hops(std::span<const double> per_hop_dbm);

struct PixelRecord {
    int i_az = 0;
    int i_el = 0;
    AngularPose pose;
    std::vector<double> per_hop_dbm; // by hop index; NaN when invalid
    double integrated_dbm = 0.0;     // NaN when invalid
    double t_offset_s = 0.0;
    bool valid = true;
    bool clipped = false;
};

using PixelSink = std::function<void(const PixelRecord&)>;

struct ScanOptions {
    std::uint64_t seed = 0;
    /// Captured pixels allowed to wait for power processing.
    std::size_t pipeline_depth = 2;
    /// Cross-check the device position after every move.
    bool verify_position = true;
};

struct ScanResult {
    Heatmap heatmap;
    std::vector<PixelRecord> records; // acquisition order
    std::size_t invalid_pixels = 0;
    std::size_t clipped_captures = 0;
    bool complete = false;
    std::string abort_reason;
    /// The abort was caused by the device link rather than the mechanism.
    bool link_failure = false;
    double simulated_duration_s = 0.0;
};

/// Capture seed for one hop of one pixel, derived from the run seed.
std::uint64_t capture_seed(std::uint64_t run_seed, const PixelIndex& pixel, int az_pixels, std::size_t hop);

/// Runs the scan. Stage A (this function's worker thread) homes if needed,
/// moves, and captures; stage B (the calling thread) computes powers, fills
/// the heatmap, and invokes `sink` in acquisition order. A rotor fault ends
/// the scan with `complete == false`; a capture failure invalidates only
/// that pixel.
ScanResult execute_scan(const ScanPlan& plan, RotorClient& rotor, SdrBackend& backend, const PixelSink& sink = {},
                        const ScanOptions& options = {});

/// Self-contained simulated rig: firmware model, in-process link, and a
/// scene-driven radio that reads the physical pointing of the mechanism.
class SimulatedRig {
public:
    SimulatedRig(Scene scene, RotorConfig config, std::uint64_t seed, double sample_rate_hz = kDefaultSimSampleRateHz);

    SimulatedDevice& device() { return device_; }
    RotorClient& rotor() { return rotor_; }
    SimulatedSdr& sdr() { return sdr_; }

private:
    SimulatedDevice device_;
    DeviceTransport transport_;
    RotorClient rotor_;
    SimulatedSdr sdr_;
};

/// Convenience: fresh SimulatedRig + execute_scan.
ScanResult run_simulated_scan(const ScanPlan& plan, const Scene& scene, const ScanOptions& options,
                              const RotorConfig& config = {}, double sample_rate_hz = kDefaultSimSampleRateHz,
                              const PixelSink& sink = {});

/// Writes PixelRecords as CSV:
/// i_az,i_el,az_deg,el_deg,t_offset_s,hop0_dbm,...,integrated_dbm
class PixelLogWriter {
public:
    PixelLogWriter(std::ostream& out, std::size_t hop_count);
    void operator()(const PixelRecord& record);

private:
    std::ostream& out_;
    std::size_t hops_;
};

} // namespace dfscan
