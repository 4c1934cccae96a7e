#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dfscan/geometry.hpp"

namespace dfscan {

/// Axial-mode helix design parameters.
struct HelixDesign {
    int turns = 13;
    double pitch_deg = 11.3;
    double circumference_wavelengths = 1.0; // C_lambda
    double frequency_hz = 2.45e9;
    std::string notes; // free-form fabrication detail (wire gauge etc.)
};

/// Throws ConfigError for designs the formulas cannot evaluate (turns < 1,
/// pitch outside (0, 90), non-positive C_lambda). Returns warnings for
/// designs outside the axial-mode region.
std::vector<std::string> validate(const HelixDesign& design);

/// Turn spacing in wavelengths: C_lambda * tan(pitch).
double spacing_from_pitch(const HelixDesign& design);

// Kraus closed-form approximations. The three-argument overloads take the
// spacing directly and skip validation.
double kraus_gain_dbi(int turns, double c_lambda, double s_lambda);
double kraus_hpbw_deg(int turns, double c_lambda, double s_lambda);

double helix_gain_kraus(const HelixDesign& design);
double helix_hpbw_kraus(const HelixDesign& design);
double helix_axial_ratio(const HelixDesign& design);

enum class PatternModel { gaussian_beam, tabulated };

/// Rotationally symmetric directive gain about boresight.
class AntennaPattern {
public:
    /// Gaussian main lobe, G(psi) = G0 - 12 (psi/HPBW)^2, floored at G0 + floor.
    static AntennaPattern gaussian(double boresight_gain_dbi, double hpbw_deg,
                                   double sidelobe_floor_db = -20.0);

    /// Tabulated (offset_deg, gain_dbi) points; sorted on construction.
    /// Boresight gain is the table maximum.
    static AntennaPattern tabulated(std::vector<std::pair<double, double>> table);

    PatternModel model() const { return model_; }
    double boresight_gain() const { return boresight_gain_; }
    double hpbw() const { return hpbw_; }
    double sidelobe_floor() const { return sidelobe_floor_; }
    const std::vector<std::pair<double, double>>& table() const { return table_; }

    /// Gain toward an off-boresight angle in [0, 180] degrees.
    double gain(double offset_deg) const;

    bool operator==(const AntennaPattern&) const = default;

private:
    AntennaPattern() = default;

    PatternModel model_ = PatternModel::gaussian_beam;
    double boresight_gain_ = 0.0;
    double hpbw_ = 0.0;
    double sidelobe_floor_ = -20.0;
    std::vector<std::pair<double, double>> table_;
};

inline double pattern_gain(const AntennaPattern& pattern, double offset_deg)
{
    return pattern.gain(offset_deg);
}

/// Great-circle angle between two directions, degrees in [0, 180].
double angular_offset(const AngularPose& pose, const AngularPose& direction);

/// Reads an `offset_deg,gain_dbi` CSV cut. A first line with no numeric
/// field is taken as a header. Throws ParseError naming the line.
AntennaPattern load_measured_pattern(const std::filesystem::path& file);
AntennaPattern parse_measured_pattern(const std::string& text);

} // namespace dfscan
