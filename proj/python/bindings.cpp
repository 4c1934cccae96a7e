#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dfscan/antenna.hpp"
#include "dfscan/error.hpp"
#include "dfscan/heatmap.hpp"
#include "dfscan/protocol.hpp"
#include "dfscan/rf_scene.hpp"
#include "dfscan/rotor.hpp"
#include "dfscan/scan_engine.hpp"

namespace py = pybind11;
using namespace dfscan;

namespace {

HelixDesign helix(int turns, double pitch_deg, double c_lambda)
{
    HelixDesign d;
    d.turns = turns;
    d.pitch_deg = pitch_deg;
    d.circumference_wavelengths = c_lambda;
    return d;
}

// Rows are elevation ascending, columns azimuth ascending (row 0 = lowest
// elevation, unlike the image exports).
py::array_t<double> heatmap_values(const Heatmap& map)
{
    py::array_t<double> out({map.el_pixels(), map.az_pixels()});
    auto v = out.mutable_unchecked<2>();
    for (int j = 0; j < map.el_pixels(); ++j)
        for (int i = 0; i < map.az_pixels(); ++i)
            v(j, i) = map.at(i, j);
    return out;
}

py::dict record_dict(const PixelRecord& r)
{
    py::dict d;
    d["i_az"] = r.i_az;
    d["i_el"] = r.i_el;
    d["az_deg"] = r.pose.az;
    d["el_deg"] = r.pose.el;
    d["per_hop_dbm"] = r.per_hop_dbm;
    d["integrated_dbm"] = r.integrated_dbm;
    d["t_offset_s"] = r.t_offset_s;
    d["valid"] = r.valid;
    return d;
}

} // namespace

PYBIND11_MODULE(_dfscan, m)
{
    m.doc() = "Rotating-antenna RF direction-finding scanner: core operations";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
    static py::exception<TransportError> transport_error(m, "TransportError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const ParseError& e) {
            config_error(e.what());
        } catch (const TransportError& e) {
            transport_error(e.what());
        } catch (const Error& e) {
            error(e.what());
        }
    });

    m.def("helix_gain_kraus", [](int turns, double pitch, double c_lambda) { return helix_gain_kraus(helix(turns, pitch, c_lambda)); },
          py::arg("turns"), py::arg("pitch_deg"), py::arg("c_lambda") = 1.0);
    m.def("helix_hpbw_kraus", [](int turns, double pitch, double c_lambda) { return helix_hpbw_kraus(helix(turns, pitch, c_lambda)); },
          py::arg("turns"), py::arg("pitch_deg"), py::arg("c_lambda") = 1.0);
    m.def("helix_axial_ratio", [](int turns, double pitch, double c_lambda) { return helix_axial_ratio(helix(turns, pitch, c_lambda)); },
          py::arg("turns"), py::arg("pitch_deg"), py::arg("c_lambda") = 1.0);

    py::class_<AntennaPattern>(m, "AntennaPattern")
        .def_static("gaussian", &AntennaPattern::gaussian, py::arg("boresight_gain_dbi"), py::arg("hpbw_deg"),
                    py::arg("sidelobe_floor_db") = -20.0)
        .def_static("tabulated", &AntennaPattern::tabulated, py::arg("table"))
        .def("gain", &AntennaPattern::gain, py::arg("offset_deg"))
        .def_property_readonly("boresight_gain", &AntennaPattern::boresight_gain)
        .def_property_readonly("hpbw", &AntennaPattern::hpbw);

    m.def("fspl", &fspl, py::arg("distance_m"), py::arg("frequency_hz"));

    py::class_<CaptureRequest>(m, "CaptureRequest")
        .def_readonly("center_hz", &CaptureRequest::center_hz)
        .def_readonly("bandwidth_hz", &CaptureRequest::bandwidth_hz)
        .def_readonly("duration_s", &CaptureRequest::duration_s)
        .def("__repr__", [](const CaptureRequest& r) {
            return "CaptureRequest(center_hz=" + std::to_string(r.center_hz) +
                   ", bandwidth_hz=" + std::to_string(r.bandwidth_hz) + ")";
        });

    m.def("build_hop_plan",
          [](double low_hz, double high_hz, double hop_bw_hz, double dur_s) {
              return build_hop_plan({low_hz, high_hz}, hop_bw_hz, dur_s);
          },
          py::arg("low_hz"), py::arg("high_hz"), py::arg("hop_bandwidth_hz") = 20e6, py::arg("hop_duration_s") = 0.125);

    py::class_<ScanPlan>(m, "ScanPlan")
        .def(py::init([](std::pair<double, double> az, std::pair<double, double> el, int az_pixels, int el_pixels,
                         std::vector<CaptureRequest> hops, double settle_s, bool unsafe_settle) {
                 ScanPlan p;
                 p.az_range = {az.first, az.second};
                 p.el_range = {el.first, el.second};
                 p.az_pixels = az_pixels;
                 p.el_pixels = el_pixels;
                 p.hops = std::move(hops);
                 p.settle_s = settle_s;
                 p.unsafe_settle = unsafe_settle;
                 p.validate();
                 return p;
             }),
             py::arg("az_range"), py::arg("el_range"), py::arg("az_pixels"), py::arg("el_pixels"), py::arg("hops"),
             py::arg("settle_s") = kMinSettleS, py::arg("unsafe_settle") = false)
        .def_readonly("az_pixels", &ScanPlan::az_pixels)
        .def_readonly("el_pixels", &ScanPlan::el_pixels)
        .def_readonly("hops", &ScanPlan::hops)
        .def("pixel_pose", [](const ScanPlan& p, int i, int j) {
            const auto pose = p.pixel_pose(i, j);
            return std::make_pair(pose.az, pose.el);
        });

    m.def("estimate_duration", &estimate_duration, py::arg("plan"));
    m.def("pixel_order", [](const ScanPlan& plan) {
        std::vector<std::pair<int, int>> out;
        for (const auto& p : pixel_order(plan))
            out.emplace_back(p.i_az, p.i_el);
        return out;
    }, py::arg("plan"));
    m.def("integrate_hops", [](std::vector<double> v) { return integrate_hops(v); }, py::arg("per_hop_dbm"));

    m.def("angle_to_steps", [](const std::string& axis, double angle) {
        return angle_to_steps(RotorConfig{}, axis == "az" ? Axis::az : Axis::el, angle);
    }, py::arg("axis"), py::arg("angle_deg"));
    m.def("steps_to_angle", [](const std::string& axis, std::int64_t steps) {
        return steps_to_angle(RotorConfig{}, axis == "az" ? Axis::az : Axis::el, steps);
    }, py::arg("axis"), py::arg("steps"));
    m.def("encode_move", [](std::int32_t az, std::int32_t el) { return protocol::encode_command(protocol::Move{az, el}); });

    py::class_<Scene>(m, "Scene")
        .def_property_readonly("emitter_count", [](const Scene& s) { return s.emitters.size(); })
        .def_property_readonly("wall_count", [](const Scene& s) { return s.walls.size(); })
        .def("without_walls", [](Scene s) {
            s.walls.clear();
            return s;
        });
    m.def("load_scene", &load_scene, py::arg("path"));
    m.def("received_power",
          [](const Scene& s, double az, double el, double low_hz, double high_hz) {
              return received_power(s, {az, el}, {low_hz, high_hz});
          },
          py::arg("scene"), py::arg("az_deg"), py::arg("el_deg"), py::arg("low_hz"), py::arg("high_hz"));

    py::class_<Heatmap>(m, "Heatmap")
        .def_property_readonly("az_pixels", &Heatmap::az_pixels)
        .def_property_readonly("el_pixels", &Heatmap::el_pixels)
        .def_property_readonly("normalized", &Heatmap::normalized)
        .def_property_readonly("complete", &Heatmap::complete)
        .def("values", &heatmap_values)
        .def("at", &Heatmap::at, py::arg("i_az"), py::arg("i_el"))
        .def("argmax", [](const Heatmap& h) { return argmax(h); })
        .def("export_csv", &export_csv, py::arg("path"))
        .def("export_pgm", &export_pgm, py::arg("path"))
        .def("export_png", [](const Heatmap& h, const std::filesystem::path& p, int factor) {
            export_png(h, default_colormap(), p, factor);
        }, py::arg("path"), py::arg("factor") = 1);
    m.def("read_csv", &read_csv, py::arg("path"));
    m.def("normalize_clip", [](const std::vector<Heatmap>& maps, std::size_t ref) { return normalize_clip(maps, ref); },
          py::arg("maps"), py::arg("reference_index"));

    m.def("run_simulated_scan",
          [](const ScanPlan& plan, const Scene& scene, std::uint64_t seed, double sample_rate_hz,
             std::size_t pipeline_depth) {
              ScanResult r;
              {
                  py::gil_scoped_release release;
                  r = run_simulated_scan(plan, scene, {.seed = seed, .pipeline_depth = pipeline_depth}, {},
                                         sample_rate_hz);
              }
              py::dict out;
              out["heatmap"] = r.heatmap;
              out["complete"] = r.complete;
              out["abort_reason"] = r.abort_reason;
              out["invalid_pixels"] = r.invalid_pixels;
              out["simulated_duration_s"] = r.simulated_duration_s;
              py::list records;
              for (const auto& rec : r.records)
                  records.append(record_dict(rec));
              out["records"] = records;
              return out;
          },
          py::arg("plan"), py::arg("scene"), py::arg("seed"), py::arg("sample_rate_hz") = kDefaultSimSampleRateHz,
          py::arg("pipeline_depth") = 2);
}
