#include "dfscan/rf_scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "dfscan/error.hpp"
#include "dfscan/rng.hpp"

namespace dfscan {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

} // namespace

std::pair<Vec3, Vec3> Wall::axes() const
{
    const Vec3 up{0.0, 0.0, 1.0};
    Vec3 u = cross(up, normal);
    if (norm(u) < 1e-9)
        u = {1.0, 0.0, 0.0}; // horizontal wall (floor/ceiling)
    else
        u = u * (1.0 / norm(u));
    return {u, cross(normal, u)};
}

bool Wall::crosses(const Vec3& target) const
{
    const double denom = dot(target, normal);
    if (std::abs(denom) < 1e-12)
        return false;
    const double t = dot(point, normal) / denom;
    if (!(t > 0.0 && t < 1.0))
        return false;
    const Vec3 local = target * t - point;
    const auto [u, v] = axes();
    return std::abs(dot(local, u)) <= half_width && std::abs(dot(local, v)) <= half_height;
}

void Scene::validate()
{
    std::set<std::string> labels;
    for (const auto& e : emitters) {
        if (!labels.insert(e.label).second)
            throw ConfigError("duplicate emitter label `" + e.label + "`");
        if (!(e.band.low_hz < e.band.high_hz))
            throw ConfigError("emitter `" + e.label + "`: band low must be below band high");
        if (!finite(e.position) || norm(e.position) == 0.0)
            throw ConfigError("emitter `" + e.label + "`: position must be finite and away from the receiver");
        if (!std::isfinite(e.eirp_dbm))
            throw ConfigError("emitter `" + e.label + "`: EIRP must be finite");
    }
    for (auto& w : walls) {
        if (!(w.attenuation_db >= 0.0))
            throw ConfigError("wall `" + w.label + "`: attenuation must be >= 0 dB");
        const double n = norm(w.normal);
        if (!(n > 0.0) || !finite(w.normal) || !finite(w.point))
            throw ConfigError("wall `" + w.label + "`: normal must be a finite nonzero vector");
        w.normal = w.normal * (1.0 / n);
        if (!(w.half_width > 0.0) || !(w.half_height > 0.0))
            throw ConfigError("wall `" + w.label + "`: extents must be positive");
    }
    if (!(chain.noise_figure_db >= 0.0))
        throw ConfigError("noise figure must be >= 0 dB");
    if (!(temperature_k > 0.0))
        throw ConfigError("temperature must be positive");
}

double fspl(double distance_m, double frequency_hz)
{
    if (!(distance_m > 0.0) || !(frequency_hz > 0.0))
        throw DomainError("fspl requires positive distance and frequency");
    return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * frequency_hz / kSpeedOfLight);
}

double band_overlap(const Band& emitter_band, const Band& capture_band)
{
    const double lo = std::max(emitter_band.low_hz, capture_band.low_hz);
    const double hi = std::min(emitter_band.high_hz, capture_band.high_hz);
    if (!(hi > lo) || !(emitter_band.width() > 0.0))
        return 0.0;
    return std::min(1.0, (hi - lo) / emitter_band.width());
}

double wall_loss_db(const Scene& scene, const Vec3& target)
{
    double loss = 0.0;
    for (const auto& w : scene.walls)
        if (w.crosses(target))
            loss += w.attenuation_db;
    return loss;
}

double noise_floor_dbm(const Scene& scene, double bandwidth_hz)
{
    return kThermalNoiseDbmPerHz + 10.0 * std::log10(scene.temperature_k / kReferenceTemperatureK) +
           10.0 * std::log10(bandwidth_hz) + scene.chain.noise_figure_db + scene.chain.lna_gain_db;
}

double PowerBreakdown::total_dbm() const
{
    double total = db_to_linear(noise_dbm);
    for (const auto& p : emitter_dbm)
        if (p)
            total += db_to_linear(*p);
    return linear_to_db(total);
}

PowerBreakdown received_breakdown(const Scene& scene, const AngularPose& pose, const Band& capture_band)
{
    PowerBreakdown out;
    out.noise_dbm = noise_floor_dbm(scene, capture_band.width());
    out.emitter_dbm.reserve(scene.emitters.size());
    for (const auto& e : scene.emitters) {
        const double frac = band_overlap(e.band, capture_band);
        if (frac <= 0.0) {
            out.emitter_dbm.emplace_back(std::nullopt);
            continue;
        }
        const Band overlap{std::max(e.band.low_hz, capture_band.low_hz), std::min(e.band.high_hz, capture_band.high_hz)};
        const double offset = angular_offset(pose, direction_of(e.position));
        out.emitter_dbm.emplace_back(e.eirp_dbm + 10.0 * std::log10(frac) + scene.chain.pattern.gain(offset) -
                                     fspl(norm(e.position), overlap.center()) - wall_loss_db(scene, e.position) +
                                     scene.chain.lna_gain_db);
    }
    return out;
}

std::vector<std::complex<double>> emitter_waveform(std::uint64_t emitter_seed, std::size_t index,
                                                   const CaptureRequest& request, std::size_t count)
{
    std::uint64_t seed = mix_seed(emitter_seed, index);
    seed = mix_seed(seed, std::bit_cast<std::uint64_t>(request.center_hz));
    seed = mix_seed(seed, std::bit_cast<std::uint64_t>(request.bandwidth_hz));
    ComplexGaussian gen(seed);
    std::vector<std::complex<double>> w(count);
    for (auto& s : w)
        s = gen();
    return w;
}

namespace {

template <class WaveformFn>
IqCapture combine(const Scene& scene, const AngularPose& pose, const CaptureRequest& request, double sample_rate_hz,
                  WaveformFn&& waveform)
{
    request.validate();
    if (!request.seed)
        throw ConfigError("simulated capture requires a seed");
    if (!(sample_rate_hz > 0.0))
        throw ConfigError("sample rate must be positive");

    const auto breakdown = received_breakdown(scene, pose, band_of(request));
    const double cal = scene.chain.calibration_offset_db;
    const std::size_t count = sample_count(request, sample_rate_hz);

    // Linear full-scale powers.
    const double noise_power = db_to_linear(breakdown.noise_dbm - cal);
    double total = noise_power;
    for (const auto& p : breakdown.emitter_dbm)
        if (p)
            total += db_to_linear(*p - cal);

    IqCapture cap;
    cap.center_hz = request.center_hz;
    cap.sample_rate_hz = sample_rate_hz;

    double level = 1.0;
    if (total > 1.0) {
        level = 1.0 / total;
        cap.clipped = true;
    }

    cap.samples.resize(count);
    ComplexGaussian noise(*request.seed);
    const double noise_amp = std::sqrt(noise_power * level);
    for (auto& s : cap.samples)
        s = noise_amp * noise();

    for (std::size_t i = 0; i < breakdown.emitter_dbm.size(); ++i) {
        const auto& p = breakdown.emitter_dbm[i];
        if (!p)
            continue;
        const double amp = std::sqrt(db_to_linear(*p - cal) * level);
        const std::vector<std::complex<double>>& w = waveform(i, count);
        for (std::size_t k = 0; k < count; ++k)
            cap.samples[k] += amp * w[k];
    }

    // ADC saturation.
    for (auto& s : cap.samples) {
        const double mag = std::abs(s);
        if (mag > 1.0) {
            s /= mag;
            cap.clipped = true;
        }
    }
    return cap;
}

} // namespace

IqCapture synthesize_iq(const Scene& scene, const AngularPose& pose, const CaptureRequest& request,
                        std::uint64_t emitter_seed, double sample_rate_hz)
{
    std::vector<std::complex<double>> scratch;
    return combine(scene, pose, request, sample_rate_hz,
                   [&](std::size_t index, std::size_t count) -> const std::vector<std::complex<double>>& {
                       scratch = emitter_waveform(emitter_seed, index, request, count);
                       return scratch;
                   });
}

SimulatedSdr::SimulatedSdr(Scene scene, std::function<AngularPose()> pose_source, std::uint64_t emitter_seed,
                           double sample_rate_hz)
    : scene_(std::move(scene)), pose_source_(std::move(pose_source)), emitter_seed_(emitter_seed),
      sample_rate_hz_(sample_rate_hz)
{
    scene_.validate();
    if (!pose_source_)
        throw ConfigError("simulated SDR needs a pose source");
}

const std::vector<std::complex<double>>& SimulatedSdr::waveform(std::size_t index, const CaptureRequest& request,
                                                               std::size_t count)
{
    const auto key = std::make_tuple(index, request.center_hz, request.bandwidth_hz, count);
    auto it = cache_.find(key);
    if (it == cache_.end())
        it = cache_.emplace(key, emitter_waveform(emitter_seed_, index, request, count)).first;
    return it->second;
}

IqCapture SimulatedSdr::capture(const CaptureRequest& request)
{
    const AngularPose pose = pose_source_();
    return combine(scene_, pose, request, sample_rate_hz_,
                   [&](std::size_t index, std::size_t count) -> const std::vector<std::complex<double>>& {
                       return waveform(index, request, count);
                   });
}

} // namespace dfscan
