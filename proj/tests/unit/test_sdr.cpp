#include <doctest.h>

#include <cmath>
#include <random>

#include "dfscan/error.hpp"
#include "dfscan/rf_scene.hpp"
#include "dfscan/rng.hpp"
#include "dfscan/sdr.hpp"
#include "support.hpp"

using namespace dfscan;

namespace {

CaptureRequest request(double center, double bw, double dur, std::optional<std::uint64_t> seed = 1)
{
    CaptureRequest r;
    r.center_hz = center;
    r.bandwidth_hz = bw;
    r.duration_s = dur;
    r.seed = seed;
    return r;
}

Scene quiet_scene()
{
    Scene s;
    s.chain.lna_gain_db = 0.0;
    s.chain.noise_figure_db = 1.2;
    return s;
}

double stddev(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v)
        m += x;
    m /= v.size();
    double acc = 0;
    for (double x : v)
        acc += (x - m) * (x - m);
    return std::sqrt(acc / (v.size() - 1));
}

} // namespace

TEST_CASE("capture power")
{
    std::vector<std::complex<double>> ones(100, {1.0, 0.0});
    CHECK(capture_power(ones) == doctest::Approx(0.0));
    std::vector<std::complex<double>> half(100, {0.5, 0.0});
    CHECK(capture_power(half) == doctest::Approx(-6.020599913279624).epsilon(1e-12));
    std::vector<std::complex<double>> zeros(100);
    CHECK(capture_power(zeros) == doctest::Approx(-300.0));
    CHECK_THROWS_AS(capture_power(std::vector<std::complex<double>>{}), DomainError);
}

TEST_CASE("calibration offset")
{
    CHECK(dbfs_to_dbm(-6.02, 0.0) == doctest::Approx(-6.02));
    CHECK(dbfs_to_dbm(-6.02, -10.0) == doctest::Approx(-16.02));
}

TEST_CASE("scaling a capture shifts its power by 20 log10 g")
{
    std::mt19937_64 rng(8);
    ComplexGaussian g(5);
    std::uniform_real_distribution<double> gain(1e-3, 1e3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::complex<double>> x(257);
        for (auto& s : x)
            s = g() * 0.01;
        const double k = gain(rng);
        auto y = x;
        for (auto& s : y)
            s *= k;
        CHECK(std::abs(capture_power(y) - (capture_power(x) + 20 * std::log10(k))) < 1e-9);
    }
}

TEST_CASE("capture request validation and sample counts")
{
    CHECK(sample_count(request(2.45e9, 20e6, 0.125), 2e6) == 250000);
    CHECK(sample_count(request(2.45e9, 20e6, 1e-9), 2e6) == 1);
    CHECK_NOTHROW(request(2.45e9, 20e6, 0.1).validate());
    CHECK_THROWS_AS(request(2.45e9, 25e6, 0.1).validate(), ConfigError);
    CHECK_THROWS_AS(request(2.45e9, 20e6, 0.0).validate(), ConfigError);
    CHECK_THROWS_AS(request(2.45e9, 0.0, 0.1).validate(), ConfigError);
}

TEST_CASE("simulated captures")
{
    const Scene scene = quiet_scene();
    const auto req = request(2.45e9, 20e6, 0.125, 77);
    const auto a = synthesize_iq(scene, {0, 0}, req, 1);
    const auto b = synthesize_iq(scene, {0, 0}, req, 1);
    CHECK(a.samples.size() == 250000);
    CHECK(a.samples == b.samples);
    CHECK(a.center_hz == 2.45e9);
    CHECK(a.sample_rate_hz == 2e6);
    CHECK_FALSE(a.clipped);
    CHECK(std::abs(capture_power(a) - (-99.7897)) < 0.3);
    for (const auto& s : a.samples)
        REQUIRE(std::abs(s) <= 1.0);

    const auto c = synthesize_iq(scene, {0, 0}, request(2.45e9, 20e6, 0.125, 78), 1);
    CHECK(c.samples != a.samples);

    CHECK_THROWS_AS(synthesize_iq(scene, {0, 0}, request(2.45e9, 25e6, 0.1), 1), ConfigError);
    CHECK_THROWS_AS(synthesize_iq(scene, {0, 0}, request(2.45e9, 20e6, 0.1, std::nullopt), 1), ConfigError);
}

TEST_CASE("noise-only level over 1e5 samples for many seeds")
{
    const Scene scene = quiet_scene();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto cap = synthesize_iq(scene, {0, 0}, request(1.688e9, 20e6, 0.05, seed), 0);
        REQUIRE(cap.samples.size() == 100000);
        CHECK(std::abs(dbfs_to_dbm(capture_power(cap), 0.0) - (-99.7897)) < 0.3);
    }
}

TEST_CASE("power estimate spread shrinks as 1/sqrt(N)")
{
    const Scene scene = quiet_scene();
    std::vector<double> spread;
    for (double n : {1e3, 1e4, 1e5}) {
        std::vector<double> est;
        for (std::uint64_t seed = 0; seed < 60; ++seed) {
            const auto cap = synthesize_iq(scene, {0, 0}, request(1.688e9, 20e6, n / 2e6, 1000 + seed), 0);
            est.push_back(std::pow(10.0, capture_power(cap) / 10.0));
        }
        spread.push_back(stddev(est) / std::pow(10.0, -99.7897 / 10.0));
    }
    // Relative std of a mean of N unit exponentials is 1/sqrt(N).
    CHECK(spread[0] == doctest::Approx(1 / std::sqrt(1e3)).epsilon(0.3));
    CHECK(spread[1] == doctest::Approx(1 / std::sqrt(1e4)).epsilon(0.3));
    CHECK(spread[2] == doctest::Approx(1 / std::sqrt(1e5)).epsilon(0.3));
    CHECK(spread[0] / spread[1] == doctest::Approx(std::sqrt(10.0)).epsilon(0.35));
    CHECK(spread[1] / spread[2] == doctest::Approx(std::sqrt(10.0)).epsilon(0.35));
}

TEST_CASE("full-scale limiting")
{
    Scene scene = quiet_scene();
    scene.chain.calibration_offset_db = -120.0; // noise lands near +20 dBFS
    const auto cap = synthesize_iq(scene, {0, 0}, request(2.45e9, 20e6, 0.01, 3), 0);
    CHECK(cap.clipped);
    for (const auto& s : cap.samples)
        REQUIRE(std::abs(s) <= 1.0 + 1e-15);
}

TEST_CASE("raw capture dump round trip")
{
    testing::TempDir dir("raw");
    const auto cap = synthesize_iq(quiet_scene(), {0, 0}, request(1.658e9, 20e6, 0.001, 9), 0);
    write_raw_capture(cap, dir / "cap.iq");
    CHECK(std::filesystem::file_size(dir / "cap.iq") == cap.samples.size() * 8);
    const auto hdr = testing::slurp(dir / "cap.iq.hdr");
    CHECK(hdr.find("center_hz=1658000000\n") != std::string::npos);
    CHECK(hdr.find("count=2000\n") != std::string::npos);
    const auto back = read_raw_capture(dir / "cap.iq");
    REQUIRE(back.samples.size() == cap.samples.size());
    CHECK(back.center_hz == cap.center_hz);
    CHECK(back.sample_rate_hz == cap.sample_rate_hz);
    for (std::size_t i = 0; i < cap.samples.size(); ++i) {
        CHECK(back.samples[i].real() == static_cast<float>(cap.samples[i].real()));
        CHECK(back.samples[i].imag() == static_cast<float>(cap.samples[i].imag()));
    }
    CHECK_THROWS_AS(read_raw_capture(dir / "missing.iq"), IoError);
    testing::spit(dir / "cap.iq.hdr", "center_hz=1\nrate_hz=2\ncount=5\n");
    CHECK_THROWS_AS(read_raw_capture(dir / "cap.iq"), IoError);
    testing::spit(dir / "cap.iq.hdr", "center_hz=1\nrate_hz\n");
    CHECK_THROWS_AS(read_raw_capture(dir / "cap.iq"), ParseError);
}
