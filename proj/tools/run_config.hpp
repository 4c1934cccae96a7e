#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dfscan/scan_engine.hpp"

namespace dfscan::cli {

enum class Backend { sim, serial };

/// Everything a command needs, merged from an optional JSON config file and
/// the command-line flags (flags win).
struct RunConfig {
    double az_min = -45.0;
    double az_max = 45.0;
    double el_min = 0.0;
    double el_max = 30.0;
    int az_pixels = 50;
    int el_pixels = 25;
    double band_low_mhz = 1648.0;
    double band_high_mhz = 1728.0;
    double hop_bw_mhz = 20.0;
    double hop_dur_s = 0.125;
    double settle_s = kMinSettleS;
    bool unsafe_settle = false;
    std::string band_label = "L-band";

    Backend backend = Backend::sim;
    std::string scene;
    std::string port;
    int baud = 115200;
    std::optional<std::uint64_t> seed;
    std::optional<double> calibration_offset_db;
    double sample_rate_hz = kDefaultSimSampleRateHz;
    std::size_t pipeline_depth = 2;
    std::string out = "dfscan-out";
    int upscale = 8;

    ScanPlan plan() const;
    nlohmann::json to_json() const;
    /// Overwrites the fields present in `doc`. Accepts either a bare config
    /// object or a run manifest (its "config" member). Unknown keys are
    /// rejected with ConfigError.
    void merge_json(const nlohmann::json& doc);
};

RunConfig load_run_config(const std::filesystem::path& path);

std::string to_string(Backend backend);
Backend parse_backend(const std::string& name);

/// "5000 s (1:23:20)"; durations under a second print as "0.5 s".
std::string format_duration(double seconds);

} // namespace dfscan::cli
