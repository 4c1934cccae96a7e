#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dfscan/antenna.hpp"
#include "dfscan/geometry.hpp"
#include "dfscan/sdr.hpp"

namespace dfscan {

constexpr double kSpeedOfLight = 299'792'458.0;
/// Thermal noise density at the 290 K reference temperature.
constexpr double kThermalNoiseDbmPerHz = -174.0;
constexpr double kReferenceTemperatureK = 290.0;
constexpr double kDefaultSimSampleRateHz = 2e6;

struct Band {
    double low_hz = 0.0;
    double high_hz = 0.0;

    double width() const { return high_hz - low_hz; }
    double center() const { return 0.5 * (low_hz + high_hz); }
    bool operator==(const Band&) const = default;
};

inline Band band_of(const CaptureRequest& r) { return {r.low_hz(), r.high_hz()}; }

struct Emitter {
    std::string label;
    Vec3 position;       // meters, receiver at origin
    double eirp_dbm = 0.0;
    Band band;
};

/// Finite rectangular wall. Extents are half-sizes along the in-plane axes
/// returned by `axes()`: for a vertical wall, horizontal then vertical.
struct Wall {
    std::string label;
    Vec3 point;
    Vec3 normal{1.0, 0.0, 0.0};
    double half_width = 0.0;
    double half_height = 0.0;
    double attenuation_db = 0.0;

    std::pair<Vec3, Vec3> axes() const;

    /// True when the open segment from the receiver to `target` passes
    /// through the rectangle.
    bool crosses(const Vec3& target) const;
};

struct ReceiveChain {
    AntennaPattern pattern = AntennaPattern::gaussian(14.01, 40.0);
    double lna_gain_db = 38.0;
    double noise_figure_db = 1.2;
    double calibration_offset_db = 0.0;
};

struct Scene {
    std::vector<Emitter> emitters;
    std::vector<Wall> walls;
    ReceiveChain chain;
    double temperature_k = kReferenceTemperatureK;

    /// Normalizes wall normals and checks invariants; throws ConfigError.
    void validate();
};

/// Free-space path loss 20 log10(4 pi d f / c). Throws DomainError for
/// non-positive inputs.
double fspl(double distance_m, double frequency_hz);

/// Fraction of the emitter's band that falls inside the capture band.
double band_overlap(const Band& emitter_band, const Band& capture_band);

/// Total one-way wall attenuation on the line of sight to `target`.
double wall_loss_db(const Scene& scene, const Vec3& target);

/// Receiver noise power after the LNA over `bandwidth_hz`, dBm.
double noise_floor_dbm(const Scene& scene, double bandwidth_hz);

/// Per-emitter received power at the LNA output (nullopt when the emitter
/// has no energy in the band), plus the noise floor.
struct PowerBreakdown {
    double noise_dbm = 0.0;
    std::vector<std::optional<double>> emitter_dbm;

    double total_dbm() const;
};

PowerBreakdown received_breakdown(const Scene& scene, const AngularPose& pose, const Band& capture_band);

inline double received_power(const Scene& scene, const AngularPose& pose, const Band& capture_band)
{
    return received_breakdown(scene, pose, capture_band).total_dbm();
}

/// Unit-power waveform realization of emitter `index` for one tuning. The
/// realization depends on (emitter_seed, index, tuning, count) only, so it
/// is shared by every pose that observes the same hop.
std::vector<std::complex<double>> emitter_waveform(std::uint64_t emitter_seed, std::size_t index,
                                                   const CaptureRequest& request, std::size_t count);

/// Complex baseband capture whose expected per-sample power equals
/// received_power (converted to full scale with the calibration offset).
/// Receiver noise is drawn from `request.seed` (required), emitter
/// waveforms from `emitter_seed`.
IqCapture synthesize_iq(const Scene& scene, const AngularPose& pose, const CaptureRequest& request,
                        std::uint64_t emitter_seed, double sample_rate_hz = kDefaultSimSampleRateHz);

/// SDR backend backed by the scene simulator. The antenna direction is read
/// from `pose_source` at capture time.
class SimulatedSdr final : public SdrBackend {
public:
    SimulatedSdr(Scene scene, std::function<AngularPose()> pose_source, std::uint64_t emitter_seed,
                 double sample_rate_hz = kDefaultSimSampleRateHz);

    IqCapture capture(const CaptureRequest& request) override;
    double calibration_offset_db() const override { return scene_.chain.calibration_offset_db; }

    const Scene& scene() const { return scene_; }
    double sample_rate_hz() const { return sample_rate_hz_; }

private:
    const std::vector<std::complex<double>>& waveform(std::size_t index, const CaptureRequest& request,
                                                      std::size_t count);

    Scene scene_;
    std::function<AngularPose()> pose_source_;
    std::uint64_t emitter_seed_;
    double sample_rate_hz_;
    std::map<std::tuple<std::size_t, double, double, std::size_t>, std::vector<std::complex<double>>> cache_;
};

// Scene files (JSON). Relative pattern paths resolve against `base_dir`.
Scene scene_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scene load_scene(const std::filesystem::path& path);
nlohmann::json scene_to_json(const Scene& scene);

} // namespace dfscan
