#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dfscan/geometry.hpp"

namespace dfscan {

/// Center of pixel `i` when `range` is split into `n` equal cells.
inline double pixel_center(const Interval& range, int n, int i)
{
    return range.min + (i + 0.5) * range.span() / n;
}

/// az x el grid of power values. Storage is row-major with elevation rows
/// ascending and azimuth ascending within a row. Values are dBm, or [0, 1]
/// once normalized. Invalid cells hold NaN and are flagged in the mask.
class Heatmap {
public:
    Heatmap() = default;
    Heatmap(int az_pixels, int el_pixels, Interval az_range, Interval el_range, std::string band_label = {});

    int az_pixels() const { return az_pixels_; }
    int el_pixels() const { return el_pixels_; }
    const Interval& az_range() const { return az_range_; }
    const Interval& el_range() const { return el_range_; }
    const std::string& band_label() const { return band_label_; }
    void set_band_label(std::string label) { band_label_ = std::move(label); }

    bool normalized() const { return normalized_; }
    void set_normalized(bool v) { normalized_ = v; }

    /// False when the scan that produced the map was aborted.
    bool complete() const { return complete_; }
    void set_complete(bool v) { complete_ = v; }

    double at(int i_az, int i_el) const { return values_[index(i_az, i_el)]; }
    void set(int i_az, int i_el, double value);
    void set_invalid(int i_az, int i_el);
    bool valid(int i_az, int i_el) const { return !invalid_[index(i_az, i_el)]; }
    std::size_t invalid_count() const;

    double az_center(int i_az) const { return pixel_center(az_range_, az_pixels_, i_az); }
    double el_center(int i_el) const { return pixel_center(el_range_, el_pixels_, i_el); }

    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& invalid_mask() const { return invalid_; }

    /// Smallest and largest valid value; throws DomainError if none.
    std::pair<double, double> value_range() const;

    bool same_shape(const Heatmap& other) const
    {
        return az_pixels_ == other.az_pixels_ && el_pixels_ == other.el_pixels_;
    }

    bool operator==(const Heatmap&) const;

private:
    std::size_t index(int i_az, int i_el) const;

    int az_pixels_ = 0;
    int el_pixels_ = 0;
    Interval az_range_;
    Interval el_range_;
    std::string band_label_;
    bool normalized_ = false;
    bool complete_ = true;
    std::vector<double> values_;
    std::vector<std::uint8_t> invalid_;
};

/// Maximum valid cell. Ties resolve to the left-topmost cell: highest
/// elevation row first, then lowest azimuth.
std::pair<int, int> argmax(const Heatmap& map);

/// Maps every heatmap through the affine transform that sends the reference
/// map's [min, max] to [0, 1], clipping to [0, 1]. A flat reference yields
/// 0.5 everywhere and a warning.
std::vector<Heatmap> normalize_clip(const std::vector<Heatmap>& maps, std::size_t reference_index,
                                    std::vector<std::string>* warnings = nullptr);

// Binary 16-bit PGM ("P5", maxval 65535, big-endian), highest elevation row
// first. A comment line records the angular extents.
void export_pgm(const Heatmap& map, const std::filesystem::path& path);
std::string encode_pgm(const Heatmap& map);
/// Reads the samples back as normalized values (row 0 = highest elevation).
Heatmap read_pgm(const std::filesystem::path& path);

// CSV matrix: a `#` metadata line, a header row of azimuth centers, then one
// row per elevation (highest first) led by its elevation center.
void export_csv(const Heatmap& map, const std::filesystem::path& path);
std::string encode_csv(const Heatmap& map);
Heatmap read_csv(const std::filesystem::path& path);
Heatmap parse_csv(const std::string& text);

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

using Colormap = std::array<Rgb, 256>;

/// Dark-to-bright perceptually ordered table (cividis), shipped as
/// data/colormap_cividis.csv.
const Colormap& default_colormap();

/// Colormap entry for a normalized value: round(v * 255); NaN maps to 0.
std::uint8_t colormap_index(double normalized);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels; // row-major, row 0 at top

    RgbImage() = default;
    RgbImage(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const RgbImage&) const = default;
};

enum class Upscale { nearest, bilinear };

/// Bilinear sample in fractional cell coordinates (cell centers at integer
/// positions, clamped at the border). `row` counts elevation rows ascending.
double sample_bilinear(const Heatmap& map, double col, double row);

/// Colormapped image of a normalized map, each cell `factor` pixels wide.
RgbImage render(const Heatmap& map, const Colormap& colormap, int factor = 1, Upscale mode = Upscale::nearest);

void export_png(const Heatmap& map, const Colormap& colormap, const std::filesystem::path& path, int factor = 1,
                Upscale mode = Upscale::nearest);

void write_png(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_png(const std::filesystem::path& path);

/// Camera registration for overlays.
struct OverlaySpec {
    int width = 0;  // output image pixels; 0 = take from photo
    int height = 0;
    double hfov_deg = 90.0;
    double vfov_deg = 30.0;
    double cam_az_deg = 0.0;
    double cam_el_deg = 0.0;
    double alpha = 0.5;

    void validate() const;
};

/// Rectilinear angle-to-pixel mapping (continuous image coordinates).
std::pair<double, double> project(const OverlaySpec& spec, double az_deg, double el_deg);

/// Alpha-blends the colormapped heatmap over the photo. Image pixels whose
/// direction lies outside the heatmap extent keep the photo. Throws
/// ConfigError when the heatmap and camera extents do not intersect.
RgbImage overlay(const Heatmap& map, const RgbImage& photo, OverlaySpec spec,
                 const Colormap& colormap = default_colormap());

} // namespace dfscan
