#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace dfscan {

/// Widest instantaneous bandwidth a single tuning may request.
constexpr double kMaxCaptureBandwidthHz = 20e6;

/// Floor applied to mean power before taking the log (-300 dBFS).
constexpr double kPowerFloor = 1e-30;

struct CaptureRequest {
    double center_hz = 0.0;
    double bandwidth_hz = 0.0;
    double duration_s = 0.0;
    /// Receiver-noise seed for simulated backends.
    std::optional<std::uint64_t> seed;

    double low_hz() const { return center_hz - bandwidth_hz / 2.0; }
    double high_hz() const { return center_hz + bandwidth_hz / 2.0; }

    /// Throws ConfigError on bandwidth > 20 MHz or non-positive values.
    void validate() const;

    bool operator==(const CaptureRequest&) const = default;
};

struct IqCapture {
    std::vector<std::complex<double>> samples; // full-scale units
    double sample_rate_hz = 0.0;
    double center_hz = 0.0;
    /// Set when the synthesized level exceeded full scale and was limited.
    bool clipped = false;
};

/// Number of samples a request produces at a given rate, at least 1.
std::size_t sample_count(const CaptureRequest& request, double sample_rate_hz);

/// Mean power in dBFS: 10 log10(mean |x|^2), floored at kPowerFloor.
/// Throws DomainError on an empty capture.
double capture_power(std::span<const std::complex<double>> samples);
inline double capture_power(const IqCapture& capture) { return capture_power(capture.samples); }

inline double dbfs_to_dbm(double power_dbfs, double calibration_offset_db)
{
    return power_dbfs + calibration_offset_db;
}

/// Tune-and-capture contract shared by simulated and hardware radios.
class SdrBackend {
public:
    virtual ~SdrBackend() = default;

    /// Throws ConfigError for invalid requests and TransportError when the
    /// radio is unavailable.
    virtual IqCapture capture(const CaptureRequest& request) = 0;

    /// dB added to dBFS readings to obtain dBm.
    virtual double calibration_offset_db() const = 0;
};

/// Writes interleaved little-endian float32 I,Q to `path` and a text sidecar
/// `path + ".hdr"` with center_hz, rate_hz and count.
void write_raw_capture(const IqCapture& capture, const std::filesystem::path& path);
IqCapture read_raw_capture(const std::filesystem::path& path);

} // namespace dfscan
