#include <fstream>
#include <initializer_list>
#include <string_view>

#include "dfscan/error.hpp"
#include "dfscan/rf_scene.hpp"

namespace dfscan {

using nlohmann::json;

namespace {

/// Field access with JSON-pointer style paths in every error.
class Node {
public:
    Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return v_; }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError("scene " + (path_.empty() ? std::string("/") : path_) + ": " + msg);
    }

    void expect_object(std::initializer_list<std::string_view> allowed) const
    {
        if (!v_.is_object())
            fail("expected an object");
        for (const auto& [key, _] : v_.items()) {
            bool ok = false;
            for (auto a : allowed)
                ok = ok || key == a;
            if (!ok)
                Node(v_[key], path_ + "/" + key).fail("unknown key");
        }
    }

    bool has(const char* key) const { return v_.contains(key); }

    Node at(const char* key) const
    {
        if (!v_.contains(key))
            fail(std::string("missing required key `") + key + "`");
        return Node(v_.at(key), path_ + "/" + key);
    }

    Node at(std::size_t i) const { return Node(v_.at(i), path_ + "/" + std::to_string(i)); }

    double number() const
    {
        if (!v_.is_number())
            fail("expected a number");
        return v_.get<double>();
    }

    double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

    std::string string() const
    {
        if (!v_.is_string())
            fail("expected a string");
        return v_.get<std::string>();
    }

    std::size_t array_size(std::size_t expected = 0) const
    {
        if (!v_.is_array())
            fail("expected an array");
        if (expected && v_.size() != expected)
            fail("expected " + std::to_string(expected) + " elements");
        return v_.size();
    }

    Vec3 vec3() const
    {
        array_size(3);
        return {at(std::size_t{0}).number(), at(1).number(), at(2).number()};
    }

    std::pair<double, double> pair() const
    {
        array_size(2);
        return {at(std::size_t{0}).number(), at(1).number()};
    }

private:
    const json& v_;
    std::string path_;
};

AntennaPattern read_pattern(const Node& n, const std::filesystem::path& base_dir)
{
    if (!n.raw().is_object())
        n.fail("expected an object");
    const auto model = n.at("model").string();
    try {
        if (model == "gaussian") {
            n.expect_object({"model", "boresight_gain_dbi", "hpbw_deg", "sidelobe_floor_db", "note"});
            return AntennaPattern::gaussian(n.at("boresight_gain_dbi").number(), n.at("hpbw_deg").number(),
                                            n.number_or("sidelobe_floor_db", -20.0));
        }
        if (model == "tabulated") {
            n.expect_object({"model", "file", "table", "note"});
            if (n.has("file") == n.has("table"))
                n.fail("tabulated pattern needs exactly one of `file` or `table`");
            if (n.has("file")) {
                std::filesystem::path file = n.at("file").string();
                if (file.is_relative())
                    file = base_dir / file;
                return load_measured_pattern(file);
            }
            const auto table = n.at("table");
            std::vector<std::pair<double, double>> rows;
            for (std::size_t i = 0; i < table.array_size(); ++i)
                rows.push_back(table.at(i).pair());
            return AntennaPattern::tabulated(std::move(rows));
        }
    } catch (const ConfigError& e) {
        if (std::string_view(e.what()).starts_with("scene "))
            throw;
        n.fail(e.what());
    } catch (const ParseError& e) {
        n.fail(e.what());
    }
    Node(n.raw().at("model"), n.path() + "/model").fail("unknown pattern model `" + model + "`");
}

} // namespace

Scene scene_from_json(const json& doc, const std::filesystem::path& base_dir)
{
    const Node root(doc, "");
    root.expect_object({"description", "emitters", "walls", "chain", "temperature_k"});

    Scene scene;
    scene.temperature_k = root.number_or("temperature_k", kReferenceTemperatureK);

    const auto chain = root.at("chain");
    chain.expect_object({"pattern", "lna_gain_db", "noise_figure_db", "calibration_offset_db", "note"});
    if (chain.has("pattern"))
        scene.chain.pattern = read_pattern(chain.at("pattern"), base_dir);
    scene.chain.lna_gain_db = chain.number_or("lna_gain_db", 38.0);
    scene.chain.noise_figure_db = chain.number_or("noise_figure_db", 1.2);
    scene.chain.calibration_offset_db = chain.number_or("calibration_offset_db", 0.0);

    if (root.has("emitters")) {
        const auto list = root.at("emitters");
        for (std::size_t i = 0; i < list.array_size(); ++i) {
            const auto e = list.at(i);
            e.expect_object({"label", "position_m", "eirp_dbm", "eirp_offset_db", "band_hz", "note"});
            Emitter em;
            em.label = e.at("label").string();
            em.position = e.at("position_m").vec3();
            em.eirp_dbm = e.at("eirp_dbm").number() + e.number_or("eirp_offset_db", 0.0);
            const auto [lo, hi] = e.at("band_hz").pair();
            em.band = {lo, hi};
            scene.emitters.push_back(std::move(em));
        }
    }

    if (root.has("walls")) {
        const auto list = root.at("walls");
        for (std::size_t i = 0; i < list.array_size(); ++i) {
            const auto w = list.at(i);
            w.expect_object({"label", "point_m", "normal", "half_extent_m", "attenuation_db", "note"});
            Wall wall;
            wall.label = w.has("label") ? w.at("label").string() : "wall" + std::to_string(i);
            wall.point = w.at("point_m").vec3();
            wall.normal = w.at("normal").vec3();
            const auto [hw, hh] = w.at("half_extent_m").pair();
            wall.half_width = hw;
            wall.half_height = hh;
            wall.attenuation_db = w.at("attenuation_db").number();
            scene.walls.push_back(std::move(wall));
        }
    }

    scene.validate();
    return scene;
}

Scene load_scene(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scene file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scene " + path.string() + ": invalid JSON: " + e.what());
    }
    try {
        return scene_from_json(doc, path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json scene_to_json(const Scene& scene)
{
    json doc;
    doc["temperature_k"] = scene.temperature_k;
    const auto& p = scene.chain.pattern;
    json pattern;
    if (p.model() == PatternModel::gaussian_beam) {
        pattern = {{"model", "gaussian"},
                   {"boresight_gain_dbi", p.boresight_gain()},
                   {"hpbw_deg", p.hpbw()},
                   {"sidelobe_floor_db", p.sidelobe_floor()}};
    } else {
        json table = json::array();
        for (const auto& [off, g] : p.table())
            table.push_back({off, g});
        pattern = {{"model", "tabulated"}, {"table", table}};
    }
    doc["chain"] = {{"pattern", pattern},
                    {"lna_gain_db", scene.chain.lna_gain_db},
                    {"noise_figure_db", scene.chain.noise_figure_db},
                    {"calibration_offset_db", scene.chain.calibration_offset_db}};
    doc["emitters"] = json::array();
    for (const auto& e : scene.emitters)
        doc["emitters"].push_back({{"label", e.label},
                                   {"position_m", {e.position.x, e.position.y, e.position.z}},
                                   {"eirp_dbm", e.eirp_dbm},
                                   {"band_hz", {e.band.low_hz, e.band.high_hz}}});
    doc["walls"] = json::array();
    for (const auto& w : scene.walls)
        doc["walls"].push_back({{"label", w.label},
                                {"point_m", {w.point.x, w.point.y, w.point.z}},
                                {"normal", {w.normal.x, w.normal.y, w.normal.z}},
                                {"half_extent_m", {w.half_width, w.half_height}},
                                {"attenuation_db", w.attenuation_db}});
    return doc;
}

} // namespace dfscan
