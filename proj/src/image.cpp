#include <png.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dfscan/error.hpp"
#include "dfscan/heatmap.hpp"

namespace dfscan {

namespace {

constexpr Colormap kCividis = {{
#include "colormap_table.inc"
}};

Rgb blend(const Rgb& under, const Rgb& over, double alpha)
{
    auto mix = [&](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround((1.0 - alpha) * a + alpha * b));
    };
    return {mix(under.r, over.r), mix(under.g, over.g), mix(under.b, over.b)};
}

std::string extent(double center, double fov)
{
    std::ostringstream s;
    s << '[' << center - fov / 2.0 << ", " << center + fov / 2.0 << ']';
    return s.str();
}

} // namespace

const Colormap& default_colormap()
{
    return kCividis;
}

std::uint8_t colormap_index(double normalized)
{
    if (std::isnan(normalized))
        return 0;
    return static_cast<std::uint8_t>(std::lround(std::clamp(normalized, 0.0, 1.0) * 255.0));
}

double sample_bilinear(const Heatmap& map, double col, double row)
{
    col = std::clamp(col, 0.0, static_cast<double>(map.az_pixels() - 1));
    row = std::clamp(row, 0.0, static_cast<double>(map.el_pixels() - 1));
    const int c0 = static_cast<int>(std::floor(col));
    const int r0 = static_cast<int>(std::floor(row));
    const int c1 = std::min(c0 + 1, map.az_pixels() - 1);
    const int r1 = std::min(r0 + 1, map.el_pixels() - 1);
    const double tc = col - c0;
    const double tr = row - r0;
    const double top = (1.0 - tc) * map.at(c0, r0) + tc * map.at(c1, r0);
    const double bot = (1.0 - tc) * map.at(c0, r1) + tc * map.at(c1, r1);
    return (1.0 - tr) * top + tr * bot;
}

RgbImage render(const Heatmap& map, const Colormap& colormap, int factor, Upscale mode)
{
    if (!map.normalized())
        throw DomainError("rendering requires a normalized heatmap (run normalize_clip first)");
    if (factor < 1)
        throw ConfigError("upscale factor must be >= 1");

    RgbImage img(map.az_pixels() * factor, map.el_pixels() * factor);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double v;
            if (mode == Upscale::nearest) {
                v = map.at(x / factor, map.el_pixels() - 1 - y / factor);
            } else {
                const double col = (x + 0.5) / factor - 0.5;
                const double row_from_top = (y + 0.5) / factor - 0.5;
                v = sample_bilinear(map, col, (map.el_pixels() - 1) - row_from_top);
            }
            img.at(x, y) = colormap[colormap_index(v)];
        }
    return img;
}

void write_png(const RgbImage& image, const std::filesystem::path& path)
{
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_RGB;
    static_assert(sizeof(Rgb) == 3);
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot write PNG " + path.string() + ": " + msg);
    }
}

RgbImage read_png(const std::filesystem::path& path)
{
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw IoError("cannot read PNG " + path.string() + ": " + png.message);
    png.format = PNG_FORMAT_RGB;
    RgbImage img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return img;
}

void export_png(const Heatmap& map, const Colormap& colormap, const std::filesystem::path& path, int factor,
                Upscale mode)
{
    write_png(render(map, colormap, factor, mode), path);
}

void OverlaySpec::validate() const
{
    if (!(hfov_deg > 0.0) || !(vfov_deg > 0.0))
        throw ConfigError("camera field of view must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("overlay alpha must be in [0, 1]");
    if (width < 0 || height < 0)
        throw ConfigError("overlay image size must be non-negative");
}

std::pair<double, double> project(const OverlaySpec& spec, double az_deg, double el_deg)
{
    const double x = spec.width * (az_deg - spec.cam_az_deg + spec.hfov_deg / 2.0) / spec.hfov_deg;
    const double y = spec.height * (spec.cam_el_deg + spec.vfov_deg / 2.0 - el_deg) / spec.vfov_deg;
    return {x, y};
}

RgbImage overlay(const Heatmap& map, const RgbImage& photo, OverlaySpec spec, const Colormap& colormap)
{
    spec.validate();
    if (!map.normalized())
        throw DomainError("overlay requires a normalized heatmap (run normalize_clip first)");
    if (spec.width == 0)
        spec.width = photo.width;
    if (spec.height == 0)
        spec.height = photo.height;
    if (spec.width != photo.width || spec.height != photo.height)
        throw ConfigError("overlay size does not match the photo");

    const auto& az = map.az_range();
    const auto& el = map.el_range();
    const double cam_az0 = spec.cam_az_deg - spec.hfov_deg / 2.0;
    const double cam_az1 = spec.cam_az_deg + spec.hfov_deg / 2.0;
    const double cam_el0 = spec.cam_el_deg - spec.vfov_deg / 2.0;
    const double cam_el1 = spec.cam_el_deg + spec.vfov_deg / 2.0;
    if (std::min(az.max, cam_az1) <= std::max(az.min, cam_az0) || std::min(el.max, cam_el1) <= std::max(el.min, cam_el0)) {
        std::ostringstream msg;
        msg << "heatmap extent az [" << az.min << ", " << az.max << "] el [" << el.min << ", " << el.max
            << "] does not intersect camera view az " << extent(spec.cam_az_deg, spec.hfov_deg) << " el "
            << extent(spec.cam_el_deg, spec.vfov_deg);
        throw ConfigError(msg.str());
    }

    const double az_step = az.span() / map.az_pixels();
    const double el_step = el.span() / map.el_pixels();
    RgbImage out = photo;
    for (int y = 0; y < out.height; ++y) {
        // Inverse of `project` at the pixel center.
        const double el_deg = cam_el1 - (y + 0.5) / spec.height * spec.vfov_deg;
        if (el_deg < el.min || el_deg > el.max)
            continue;
        const double row = (el_deg - el.min) / el_step - 0.5;
        for (int x = 0; x < out.width; ++x) {
            const double az_deg = cam_az0 + (x + 0.5) / spec.width * spec.hfov_deg;
            if (az_deg < az.min || az_deg > az.max)
                continue;
            const double col = (az_deg - az.min) / az_step - 0.5;
            const Rgb c = colormap[colormap_index(sample_bilinear(map, col, row))];
            out.at(x, y) = blend(out.at(x, y), c, spec.alpha);
        }
    }
    return out;
}

} // namespace dfscan
