#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dfscan/error.hpp"

namespace dfscan::cli {

namespace {

std::string shortest(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class T>
void take(const nlohmann::json& doc, const char* key, T& field)
{
    if (!doc.contains(key))
        return;
    try {
        field = doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

template <class T>
void take(const nlohmann::json& doc, const char* key, std::optional<T>& field)
{
    if (!doc.contains(key))
        return;
    if (doc.at(key).is_null()) {
        field.reset();
        return;
    }
    T v{};
    take(doc, key, v);
    field = v;
}

} // namespace

std::string to_string(Backend backend)
{
    return backend == Backend::sim ? "sim" : "serial";
}

Backend parse_backend(const std::string& name)
{
    if (name == "sim")
        return Backend::sim;
    if (name == "serial")
        return Backend::serial;
    throw ConfigError("unknown backend \"" + name + "\" (expected sim or serial)");
}

ScanPlan RunConfig::plan() const
{
    ScanPlan p;
    p.az_range = {az_min, az_max};
    p.el_range = {el_min, el_max};
    p.az_pixels = az_pixels;
    p.el_pixels = el_pixels;
    p.hops = build_hop_plan({band_low_mhz * 1e6, band_high_mhz * 1e6}, hop_bw_mhz * 1e6, hop_dur_s);
    p.settle_s = settle_s;
    p.unsafe_settle = unsafe_settle;
    p.band_label = band_label;
    p.validate();
    return p;
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json j;
    j["az_min"] = az_min;
    j["az_max"] = az_max;
    j["el_min"] = el_min;
    j["el_max"] = el_max;
    j["az_pixels"] = az_pixels;
    j["el_pixels"] = el_pixels;
    j["band_low_mhz"] = band_low_mhz;
    j["band_high_mhz"] = band_high_mhz;
    j["hop_bw_mhz"] = hop_bw_mhz;
    j["hop_dur_s"] = hop_dur_s;
    j["settle_s"] = settle_s;
    j["unsafe_settle"] = unsafe_settle;
    j["band_label"] = band_label;
    j["backend"] = to_string(backend);
    j["scene"] = scene;
    j["port"] = port;
    j["baud"] = baud;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["calibration_offset_db"] = calibration_offset_db ? nlohmann::json(*calibration_offset_db) : nlohmann::json(nullptr);
    j["sample_rate_hz"] = sample_rate_hz;
    j["pipeline_depth"] = pipeline_depth;
    j["out"] = out;
    j["upscale"] = upscale;
    return j;
}

void RunConfig::merge_json(const nlohmann::json& input)
{
    const nlohmann::json& doc = input.contains("config") ? input.at("config") : input;
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    const nlohmann::json known = to_json();
    for (const auto& [key, value] : doc.items())
        if (!known.contains(key))
            throw ConfigError("unknown config key \"" + key + "\"");

    take(doc, "az_min", az_min);
    take(doc, "az_max", az_max);
    take(doc, "el_min", el_min);
    take(doc, "el_max", el_max);
    take(doc, "az_pixels", az_pixels);
    take(doc, "el_pixels", el_pixels);
    take(doc, "band_low_mhz", band_low_mhz);
    take(doc, "band_high_mhz", band_high_mhz);
    take(doc, "hop_bw_mhz", hop_bw_mhz);
    take(doc, "hop_dur_s", hop_dur_s);
    take(doc, "settle_s", settle_s);
    take(doc, "unsafe_settle", unsafe_settle);
    take(doc, "band_label", band_label);
    std::string backend_name = to_string(backend);
    take(doc, "backend", backend_name);
    backend = parse_backend(backend_name);
    take(doc, "scene", scene);
    take(doc, "port", port);
    take(doc, "baud", baud);
    take(doc, "seed", seed);
    take(doc, "calibration_offset_db", calibration_offset_db);
    take(doc, "sample_rate_hz", sample_rate_hz);
    take(doc, "pipeline_depth", pipeline_depth);
    take(doc, "out", out);
    take(doc, "upscale", upscale);
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    RunConfig cfg;
    cfg.merge_json(doc);
    return cfg;
}

std::string format_duration(double seconds)
{
    std::string out = shortest(seconds) + " s";
    if (seconds >= 1.0) {
        const auto total = static_cast<long long>(std::llround(seconds));
        char hms[48];
        std::snprintf(hms, sizeof hms, " (%lld:%02lld:%02lld)", total / 3600, total / 60 % 60, total % 60);
        out += hms;
    }
    return out;
}

} // namespace dfscan::cli
