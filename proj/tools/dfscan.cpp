#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "dfscan/antenna.hpp"
#include "dfscan/error.hpp"
#include "dfscan/heatmap.hpp"
#include "dfscan/scan_engine.hpp"
#include "dfscan/transport.hpp"
#include "run_config.hpp"

using namespace dfscan;
using namespace dfscan::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kPartial = 3, kTransport = 4 };

std::string fixed(double v, int digits)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

/// Flags that may also come from --config. Unset optionals leave the file
/// (or default) value alone.
struct PlanFlags {
    std::optional<std::string> config;
    std::optional<double> az_min, az_max, el_min, el_max;
    std::optional<int> az_pixels, el_pixels;
    std::optional<double> band_low_mhz, band_high_mhz, hop_bw_mhz, hop_dur_s, settle_s;
    bool unsafe_settle = false;
    std::optional<std::string> band_label;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", config, "JSON run config (flags override its values)");
        cmd->add_option("--az-min", az_min, "Azimuth range start, deg");
        cmd->add_option("--az-max", az_max, "Azimuth range end, deg");
        cmd->add_option("--el-min", el_min, "Elevation range start, deg");
        cmd->add_option("--el-max", el_max, "Elevation range end, deg");
        cmd->add_option("--az-pixels", az_pixels, "Azimuth pixel count");
        cmd->add_option("--el-pixels", el_pixels, "Elevation pixel count");
        cmd->add_option("--band-low", band_low_mhz, "Band low edge, MHz");
        cmd->add_option("--band-high", band_high_mhz, "Band high edge, MHz");
        cmd->add_option("--hop-bw", hop_bw_mhz, "Hop bandwidth, MHz (<= 20)");
        cmd->add_option("--hop-dur", hop_dur_s, "Hop capture duration, s");
        cmd->add_option("--settle", settle_s, "Per-pixel settle time, s");
        cmd->add_flag("--unsafe-settle", unsafe_settle, "Allow settle below 0.5 s");
        cmd->add_option("--band-label", band_label, "Label recorded with the heatmap");
    }

    RunConfig resolve() const
    {
        RunConfig cfg = config ? load_run_config(*config) : RunConfig{};
        auto over = [](auto& field, const auto& flag) {
            if (flag)
                field = *flag;
        };
        over(cfg.az_min, az_min);
        over(cfg.az_max, az_max);
        over(cfg.el_min, el_min);
        over(cfg.el_max, el_max);
        over(cfg.az_pixels, az_pixels);
        over(cfg.el_pixels, el_pixels);
        over(cfg.band_low_mhz, band_low_mhz);
        over(cfg.band_high_mhz, band_high_mhz);
        over(cfg.hop_bw_mhz, hop_bw_mhz);
        over(cfg.hop_dur_s, hop_dur_s);
        over(cfg.settle_s, settle_s);
        over(cfg.band_label, band_label);
        if (unsafe_settle)
            cfg.unsafe_settle = true;
        return cfg;
    }
};

struct ScanFlags {
    std::optional<std::string> backend, scene, port, out;
    std::optional<int> baud, upscale;
    std::optional<std::uint64_t> seed;
    std::optional<double> calibration_offset_db, sample_rate_hz;
    std::optional<std::size_t> pipeline_depth;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--backend", backend, "sim or serial")->check(CLI::IsMember({"sim", "serial"}));
        cmd->add_option("--scene", scene, "Scene JSON (drives the simulated radio)");
        cmd->add_option("--port", port, "Serial device of the rotor controller (serial backend)");
        cmd->add_option("--baud", baud, "Serial baud rate");
        cmd->add_option("--seed", seed, "Run seed (required: the radio is simulated)");
        cmd->add_option("--calibration-offset", calibration_offset_db, "dB added to dBFS (overrides the scene)");
        cmd->add_option("--sample-rate", sample_rate_hz, "Simulated radio sample rate, S/s");
        cmd->add_option("--pipeline-depth", pipeline_depth, "Captured pixels queued for processing");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--upscale", upscale, "PNG pixels per heatmap cell");
    }

    void apply(RunConfig& cfg) const
    {
        if (backend)
            cfg.backend = parse_backend(*backend);
        auto over = [](auto& field, const auto& flag) {
            if (flag)
                field = *flag;
        };
        over(cfg.scene, scene);
        over(cfg.port, port);
        over(cfg.baud, baud);
        over(cfg.out, out);
        over(cfg.upscale, upscale);
        over(cfg.sample_rate_hz, sample_rate_hz);
        over(cfg.pipeline_depth, pipeline_depth);
        if (seed)
            cfg.seed = seed;
        if (calibration_offset_db)
            cfg.calibration_offset_db = calibration_offset_db;
    }
};

void print_json(const json& j)
{
    std::cout << j.dump(2) << '\n';
}

int cmd_antenna(const HelixDesign& design, bool as_json)
{
    const auto warnings = validate(design);
    const double gain = helix_gain_kraus(design);
    const double hpbw = helix_hpbw_kraus(design);
    const double ar = helix_axial_ratio(design);
    const double spacing = spacing_from_pitch(design);
    if (as_json) {
        print_json({{"turns", design.turns},
                    {"pitch_deg", design.pitch_deg},
                    {"circumference_wavelengths", design.circumference_wavelengths},
                    {"gain_dbi", gain},
                    {"hpbw_deg", hpbw},
                    {"axial_ratio", ar},
                    {"spacing_wavelengths", spacing},
                    {"warnings", warnings}});
        return kOk;
    }
    std::cout << "helix: " << design.turns << " turns, pitch " << design.pitch_deg << " deg, C/lambda "
              << design.circumference_wavelengths << '\n'
              << "gain (Kraus)  " << fixed(gain, 2) << " dBi\n"
              << "HPBW (Kraus)  " << fixed(hpbw, 2) << " deg\n"
              << "axial ratio   " << fixed(ar, 3) << '\n'
              << "spacing       " << fixed(spacing, 4) << " wavelengths\n";
    for (const auto& w : warnings)
        std::cout << "warning: " << w << '\n';
    return kOk;
}

json plan_json(const RunConfig& cfg, const ScanPlan& plan)
{
    json hops = json::array();
    for (const auto& h : plan.hops)
        hops.push_back({{"center_hz", h.center_hz}, {"bandwidth_hz", h.bandwidth_hz}, {"duration_s", h.duration_s}});
    const auto order = pixel_order(plan);
    return {{"config", cfg.to_json()},
            {"pixels", plan.pixel_count()},
            {"hops", hops},
            {"pixel_duration_s", pixel_duration(plan)},
            {"estimated_duration_s", estimate_duration(plan)},
            {"first_pixel", {order.front().i_az, order.front().i_el}},
            {"last_pixel", {order.back().i_az, order.back().i_el}}};
}

int cmd_plan(const RunConfig& cfg, bool as_json)
{
    const ScanPlan plan = cfg.plan();
    if (as_json) {
        print_json(plan_json(cfg, plan));
        return kOk;
    }
    const auto order = pixel_order(plan);
    std::cout << "grid " << plan.az_pixels << " x " << plan.el_pixels << " (" << plan.pixel_count()
              << " pixels), az [" << plan.az_range.min << ", " << plan.az_range.max << "] deg, el ["
              << plan.el_range.min << ", " << plan.el_range.max << "] deg\n"
              << "pixel pitch " << plan.az_range.span() / plan.az_pixels << " x "
              << plan.el_range.span() / plan.el_pixels << " deg\n"
              << plan.hops.size() << " hops of " << cfg.hop_bw_mhz << " MHz, " << cfg.hop_dur_s << " s each:\n";
    for (std::size_t k = 0; k < plan.hops.size(); ++k)
        std::cout << "  " << k << "  " << plan.hops[k].center_hz / 1e6 << " MHz\n";
    std::cout << "serpentine order from (" << order.front().i_az << ", " << order.front().i_el << ") to ("
              << order.back().i_az << ", " << order.back().i_el << ")\n"
              << "per pixel " << format_duration(pixel_duration(plan)) << ", total "
              << format_duration(estimate_duration(plan)) << '\n';
    return kOk;
}

int cmd_estimate(const RunConfig& cfg, bool as_json)
{
    const ScanPlan plan = cfg.plan();
    const double t = estimate_duration(plan);
    if (as_json)
        print_json({{"estimated_duration_s", t}, {"formatted", format_duration(t)}});
    else
        std::cout << format_duration(t) << '\n';
    return kOk;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw IoError("cannot write " + path.string());
}

int cmd_scan(RunConfig cfg, bool as_json)
{
    if (cfg.scene.empty())
        throw ConfigError("--scene is required (the radio is simulated from the scene)");
    if (!cfg.seed)
        throw ConfigError("--seed is required for simulated scans");
    if (cfg.backend == Backend::serial && cfg.port.empty())
        throw ConfigError("--port is required with --backend serial");
    if (cfg.pipeline_depth < 1)
        throw ConfigError("--pipeline-depth must be at least 1");
    if (cfg.upscale < 1)
        throw ConfigError("--upscale must be at least 1");
    if (!(cfg.sample_rate_hz > 0.0))
        throw ConfigError("--sample-rate must be positive");

    const ScanPlan plan = cfg.plan();
    Scene scene = load_scene(cfg.scene);
    if (cfg.calibration_offset_db)
        scene.chain.calibration_offset_db = *cfg.calibration_offset_db;

    const fs::path out = cfg.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out))
        throw ConfigError("output directory " + out.string() + " is not writable");

    std::ofstream pixel_log(out / "pixels.csv", std::ios::binary);
    if (!pixel_log)
        throw ConfigError("output directory " + out.string() + " is not writable");
    PixelLogWriter log(pixel_log, plan.hops.size());

    const ScanOptions options{.seed = *cfg.seed, .pipeline_depth = cfg.pipeline_depth};
    ScanResult result;
    if (cfg.backend == Backend::sim) {
        result = run_simulated_scan(plan, scene, options, {}, cfg.sample_rate_hz, std::ref(log));
    } else {
        SerialPort port(cfg.port, cfg.baud);
        RotorClient rotor(port, RotorConfig{});
        SimulatedSdr radio(scene, [&rotor] { return rotor.pose(); }, *cfg.seed, cfg.sample_rate_hz);
        result = execute_scan(plan, rotor, radio, std::ref(log), options);
    }
    pixel_log.close();

    Heatmap map = result.heatmap;
    export_csv(map, out / "heatmap.csv");
    bool images = false;
    if (map.invalid_count() < plan.pixel_count()) {
        const Heatmap norm = normalize_clip({map}, 0).at(0);
        export_pgm(norm, out / "heatmap.pgm");
        export_png(norm, default_colormap(), out / "heatmap.png", cfg.upscale);
        images = true;
    }

    json summary{{"complete", result.complete},
                 {"abort_reason", result.abort_reason},
                 {"pixels_acquired", result.records.size()},
                 {"invalid_pixels", map.invalid_count()},
                 {"clipped_captures", result.clipped_captures},
                 {"simulated_duration_s", result.simulated_duration_s},
                 {"estimated_duration_s", estimate_duration(plan)}};
    if (images) {
        const auto [i_az, i_el] = argmax(map);
        summary["argmax"] = {{"i_az", i_az},
                             {"i_el", i_el},
                             {"az_deg", map.az_center(i_az)},
                             {"el_deg", map.el_center(i_el)},
                             {"dbm", map.at(i_az, i_el)}};
    }
    json files = json::array({"heatmap.csv", "pixels.csv"});
    if (images) {
        files.push_back("heatmap.pgm");
        files.push_back("heatmap.png");
    }
    const json manifest{{"tool", "dfscan"},
                        {"config", cfg.to_json()},
                        {"scene", scene_to_json(scene)},
                        {"hops", plan_json(cfg, plan)["hops"]},
                        {"result", summary},
                        {"files", files}};
    write_text(out / "manifest.json", manifest.dump(2) + "\n");

    if (as_json) {
        print_json(summary);
    } else {
        std::cout << (result.complete ? "scan complete" : "scan aborted: " + result.abort_reason) << '\n'
                  << result.records.size() << "/" << plan.pixel_count() << " pixels, " << map.invalid_count()
                  << " invalid, simulated " << format_duration(result.simulated_duration_s) << '\n';
        if (summary.contains("argmax"))
            std::cout << "peak " << fixed(summary["argmax"]["dbm"].get<double>(), 2) << " dBm at pixel ("
                      << summary["argmax"]["i_az"] << ", " << summary["argmax"]["i_el"] << "), az "
                      << summary["argmax"]["az_deg"] << " deg, el " << summary["argmax"]["el_deg"] << " deg\n";
        std::cout << "wrote " << out.string() << '\n';
    }
    if (result.complete)
        return kOk;
    return result.link_failure ? kTransport : kPartial;
}

Heatmap normalized(const Heatmap& map)
{
    return map.normalized() ? map : normalize_clip({map}, 0).at(0);
}

struct OverlayFlags {
    std::string map, photo, out;
    OverlaySpec spec;
};

int cmd_overlay(const OverlayFlags& f, bool as_json)
{
    const Heatmap map = normalized(read_csv(f.map));
    const RgbImage photo = read_png(f.photo);
    const RgbImage img = overlay(map, photo, f.spec);
    write_png(img, f.out);
    if (as_json)
        print_json({{"out", f.out}, {"width", img.width}, {"height", img.height}});
    else
        std::cout << "wrote " << f.out << " (" << img.width << " x " << img.height << ")\n";
    return kOk;
}

struct ExportFlags {
    std::vector<std::string> maps;
    std::size_t reference = 0;
    std::string out_dir = ".";
    int upscale = 8;
    bool bilinear = false;
};

int cmd_export(const ExportFlags& f, bool as_json)
{
    if (f.reference >= f.maps.size())
        throw ConfigError("--reference must index one of the " + std::to_string(f.maps.size()) + " maps");
    if (f.upscale < 1)
        throw ConfigError("--upscale must be at least 1");
    std::vector<Heatmap> maps;
    for (const auto& p : f.maps)
        maps.push_back(read_csv(p));
    std::vector<std::string> warnings;
    const auto norm = normalize_clip(maps, f.reference, &warnings);
    fs::create_directories(f.out_dir);
    json written = json::array();
    for (std::size_t k = 0; k < norm.size(); ++k) {
        const std::string stem = fs::path(f.maps[k]).stem().string() + "_" + std::to_string(k);
        const fs::path base = fs::path(f.out_dir) / stem;
        export_pgm(norm[k], base.string() + ".pgm");
        export_png(norm[k], default_colormap(), base.string() + ".png", f.upscale,
                   f.bilinear ? Upscale::bilinear : Upscale::nearest);
        export_csv(norm[k], base.string() + ".csv");
        written.push_back(stem);
        if (!as_json)
            std::cout << "wrote " << base.string() << ".{pgm,png,csv}\n";
    }
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << '\n';
    if (as_json)
        print_json({{"written", written}, {"reference", f.reference}, {"warnings", warnings}});
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rotating-antenna RF direction-finding scanner"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "Machine-readable output");

    HelixDesign design;
    auto* antenna = app.add_subcommand("antenna", "Helix antenna figures of merit");
    antenna->add_option("--turns", design.turns, "Number of turns")->capture_default_str();
    antenna->add_option("--pitch", design.pitch_deg, "Pitch angle, deg")->capture_default_str();
    antenna->add_option("--clambda", design.circumference_wavelengths, "Circumference in wavelengths")
        ->capture_default_str();
    antenna->add_option("--freq", design.frequency_hz, "Design frequency, Hz")->capture_default_str();
    antenna->add_flag("--json", as_json, "Machine-readable output");

    PlanFlags plan_flags;
    auto* plan = app.add_subcommand("plan", "Print the hop plan, grid and timing");
    plan_flags.attach(plan);
    plan->add_flag("--json", as_json, "Machine-readable output");

    auto* estimate = app.add_subcommand("estimate", "Print the scan duration");
    plan_flags.attach(estimate);
    estimate->add_flag("--json", as_json, "Machine-readable output");

    ScanFlags scan_flags;
    auto* scan = app.add_subcommand("scan", "Run a scan and write heatmap files");
    plan_flags.attach(scan);
    scan_flags.attach(scan);
    scan->add_flag("--json", as_json, "Machine-readable output");

    OverlayFlags overlay_flags;
    auto* over = app.add_subcommand("overlay", "Blend a heatmap over a photo");
    over->add_option("--map", overlay_flags.map, "Heatmap CSV")->required();
    over->add_option("--photo", overlay_flags.photo, "Photo PNG")->required();
    over->add_option("--out", overlay_flags.out, "Output PNG")->required();
    over->add_option("--hfov", overlay_flags.spec.hfov_deg, "Camera horizontal field of view, deg")->capture_default_str();
    over->add_option("--vfov", overlay_flags.spec.vfov_deg, "Camera vertical field of view, deg")->capture_default_str();
    over->add_option("--cam-az", overlay_flags.spec.cam_az_deg, "Camera azimuth, deg")->capture_default_str();
    over->add_option("--cam-el", overlay_flags.spec.cam_el_deg, "Camera elevation, deg")->capture_default_str();
    over->add_option("--alpha", overlay_flags.spec.alpha, "Heatmap opacity")->capture_default_str();
    over->add_flag("--json", as_json, "Machine-readable output");

    ExportFlags export_flags;
    auto* exp = app.add_subcommand("export", "Normalize heatmaps to a shared window and export images");
    exp->add_option("--map", export_flags.maps, "Heatmap CSV (repeatable)")->required();
    exp->add_option("--reference", export_flags.reference, "Index of the reference map")->capture_default_str();
    exp->add_option("--out-dir", export_flags.out_dir, "Output directory")->capture_default_str();
    exp->add_option("--upscale", export_flags.upscale, "PNG pixels per heatmap cell")->capture_default_str();
    exp->add_flag("--bilinear", export_flags.bilinear, "Bilinear instead of nearest upscaling");
    exp->add_flag("--json", as_json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*antenna)
            return cmd_antenna(design, as_json);
        if (*plan)
            return cmd_plan(plan_flags.resolve(), as_json);
        if (*estimate)
            return cmd_estimate(plan_flags.resolve(), as_json);
        if (*scan) {
            RunConfig cfg = plan_flags.resolve();
            scan_flags.apply(cfg);
            return cmd_scan(cfg, as_json);
        }
        if (*over)
            return cmd_overlay(overlay_flags, as_json);
        if (*exp)
            return cmd_export(export_flags, as_json);
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kTransport;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
