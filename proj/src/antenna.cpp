#include "dfscan/antenna.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dfscan/error.hpp"
#include "text_util.hpp"

namespace dfscan {

std::vector<std::string> validate(const HelixDesign& design)
{
    if (design.turns < 1)
        throw ConfigError("helix turns must be >= 1, got " + std::to_string(design.turns));
    if (!(design.pitch_deg > 0.0 && design.pitch_deg < 90.0))
        throw ConfigError("helix pitch must be in (0, 90) degrees");
    if (!(design.circumference_wavelengths > 0.0))
        throw ConfigError("helix circumference (wavelengths) must be positive");

    std::vector<std::string> warnings;
    if (design.turns < 3)
        warnings.push_back("fewer than 3 turns: axial-mode formulas are unreliable");
    if (design.circumference_wavelengths < 0.75 || design.circumference_wavelengths > 1.33)
        warnings.push_back("circumference outside the 0.75-1.33 wavelength axial-mode band");
    return warnings;
}

double spacing_from_pitch(const HelixDesign& design)
{
    return design.circumference_wavelengths * std::tan(deg2rad(design.pitch_deg));
}

double kraus_gain_dbi(int turns, double c_lambda, double s_lambda)
{
    const double directivity = 15.0 * c_lambda * c_lambda * turns * s_lambda;
    return 10.0 * std::log10(directivity);
}

double kraus_hpbw_deg(int turns, double c_lambda, double s_lambda)
{
    return 52.0 / (c_lambda * std::sqrt(turns * s_lambda));
}

double helix_gain_kraus(const HelixDesign& design)
{
    validate(design);
    return kraus_gain_dbi(design.turns, design.circumference_wavelengths, spacing_from_pitch(design));
}

double helix_hpbw_kraus(const HelixDesign& design)
{
    validate(design);
    return kraus_hpbw_deg(design.turns, design.circumference_wavelengths, spacing_from_pitch(design));
}

double helix_axial_ratio(const HelixDesign& design)
{
    if (design.turns < 1)
        throw ConfigError("helix turns must be >= 1");
    const double n = design.turns;
    return (2.0 * n + 1.0) / (2.0 * n);
}

AntennaPattern AntennaPattern::gaussian(double boresight_gain_dbi, double hpbw_deg, double sidelobe_floor_db)
{
    if (!(hpbw_deg > 0.0))
        throw ConfigError("pattern HPBW must be positive");
    if (!(sidelobe_floor_db < 0.0))
        throw ConfigError("sidelobe floor must be negative (dB relative to boresight)");
    AntennaPattern p;
    p.model_ = PatternModel::gaussian_beam;
    p.boresight_gain_ = boresight_gain_dbi;
    p.hpbw_ = hpbw_deg;
    p.sidelobe_floor_ = sidelobe_floor_db;
    return p;
}

AntennaPattern AntennaPattern::tabulated(std::vector<std::pair<double, double>> table)
{
    if (table.empty())
        throw ConfigError("tabulated pattern needs at least one point");
    for (const auto& [off, g] : table) {
        if (!(off >= 0.0 && off <= 180.0))
            throw ConfigError("tabulated pattern offset outside [0, 180]: " + std::to_string(off));
        if (!std::isfinite(g))
            throw ConfigError("tabulated pattern gain must be finite");
    }
    std::stable_sort(table.begin(), table.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    AntennaPattern p;
    p.model_ = PatternModel::tabulated;
    p.boresight_gain_ = std::max_element(table.begin(), table.end(), [](const auto& a, const auto& b) {
                            return a.second < b.second;
                        })->second;
    p.table_ = std::move(table);

    // HPBW: twice the first interpolated -3 dB crossing; if the cut never
    // drops 3 dB, twice the last tabulated offset (a lower bound).
    const double half_power = p.boresight_gain_ - 3.0;
    double half_width = p.table_.back().first;
    for (std::size_t i = 1; i < p.table_.size(); ++i) {
        const auto [x0, g0] = p.table_[i - 1];
        const auto [x1, g1] = p.table_[i];
        if (g0 >= half_power && g1 <= half_power) {
            half_width = g0 == g1 ? x0 : x0 + (x1 - x0) * (g0 - half_power) / (g0 - g1);
            break;
        }
    }
    p.hpbw_ = half_width > 0.0 ? 2.0 * half_width : 360.0;
    // Informational only for tables: deepest null relative to boresight.
    double lowest = p.boresight_gain_;
    for (const auto& e : p.table_)
        lowest = std::min(lowest, e.second);
    p.sidelobe_floor_ = lowest - p.boresight_gain_;
    return p;
}

double AntennaPattern::gain(double offset_deg) const
{
    if (!(offset_deg >= 0.0 && offset_deg <= 180.0))
        throw DomainError("pattern offset must be in [0, 180] degrees, got " + std::to_string(offset_deg));

    if (model_ == PatternModel::gaussian_beam) {
        const double r = offset_deg / hpbw_;
        return std::max(boresight_gain_ - 12.0 * r * r, boresight_gain_ + sidelobe_floor_);
    }

    if (offset_deg <= table_.front().first)
        return table_.front().second;
    if (offset_deg >= table_.back().first)
        return table_.back().second;
    auto hi = std::upper_bound(table_.begin(), table_.end(), offset_deg,
                               [](double v, const auto& e) { return v < e.first; });
    auto lo = hi - 1;
    if (hi->first == lo->first)
        return lo->second;
    const double t = (offset_deg - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double angular_offset(const AngularPose& pose, const AngularPose& direction)
{
    const double c = dot(unit_vector(pose), unit_vector(direction));
    return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

AntennaPattern parse_measured_pattern(const std::string& text)
{
    std::vector<std::pair<double, double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1)
            detail::strip_bom(line);
        detail::strip_cr(line);
        if (detail::trim(line).empty())
            continue;

        const auto fields = detail::split(line, ',');
        if (fields.size() != 2)
            throw ParseError("expected 2 fields `offset_deg,gain_dbi`, got " + std::to_string(fields.size()),
                             line_no);
        auto off = detail::parse_double(fields[0]);
        auto gain = detail::parse_double(fields[1]);
        if (rows.empty() && line_no == 1 && !off && !gain)
            continue; // header
        if (!off || !std::isfinite(*off))
            throw ParseError("cannot parse offset `" + std::string(detail::trim(fields[0])) + "`", line_no);
        if (!gain || !std::isfinite(*gain))
            throw ParseError("cannot parse gain `" + std::string(detail::trim(fields[1])) + "`", line_no);
        if (*off < 0.0 || *off > 180.0)
            throw ParseError("offset outside [0, 180] degrees", line_no);
        rows.emplace_back(*off, *gain);
    }
    if (rows.empty())
        throw ParseError("measured pattern contains no data rows", 0);
    return AntennaPattern::tabulated(std::move(rows));
}

AntennaPattern load_measured_pattern(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot open measured pattern " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_measured_pattern(ss.str());
    } catch (const ParseError& e) {
        throw e.in(file.string());
    }
}

} // namespace dfscan
