#include "dfscan/heatmap.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "dfscan/error.hpp"
#include "text_util.hpp"

namespace dfscan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string shortest(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sanitize_label(std::string s)
{
    for (auto& c : s)
        if (c == ' ' || c == '\t' || c == ',' || c == '\n' || c == '\r')
            c = '_';
    return s;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

void require_normalized(const Heatmap& map, const char* what)
{
    if (!map.normalized())
        throw DomainError(std::string(what) + " requires a normalized heatmap (run normalize_clip first)");
}

std::optional<Interval> parse_interval(std::string_view s)
{
    const auto colon = s.find(':');
    if (colon == std::string_view::npos)
        return std::nullopt;
    auto lo = detail::parse_double(s.substr(0, colon));
    auto hi = detail::parse_double(s.substr(colon + 1));
    if (!lo || !hi)
        return std::nullopt;
    return Interval{*lo, *hi};
}

} // namespace

Heatmap::Heatmap(int az_pixels, int el_pixels, Interval az_range, Interval el_range, std::string band_label)
    : az_pixels_(az_pixels), el_pixels_(el_pixels), az_range_(az_range), el_range_(el_range),
      band_label_(std::move(band_label))
{
    if (az_pixels < 1 || el_pixels < 1)
        throw ConfigError("heatmap needs at least one pixel per axis");
    const auto n = static_cast<std::size_t>(az_pixels) * static_cast<std::size_t>(el_pixels);
    values_.assign(n, kNaN);
    invalid_.assign(n, 1);
}

std::size_t Heatmap::index(int i_az, int i_el) const
{
    if (i_az < 0 || i_az >= az_pixels_ || i_el < 0 || i_el >= el_pixels_)
        throw RangeError("heatmap cell (" + std::to_string(i_az) + ", " + std::to_string(i_el) + ") out of range");
    return static_cast<std::size_t>(i_el) * az_pixels_ + i_az;
}

void Heatmap::set(int i_az, int i_el, double value)
{
    const auto k = index(i_az, i_el);
    if (!std::isfinite(value)) {
        values_[k] = kNaN;
        invalid_[k] = 1;
        return;
    }
    values_[k] = value;
    invalid_[k] = 0;
}

void Heatmap::set_invalid(int i_az, int i_el)
{
    const auto k = index(i_az, i_el);
    values_[k] = kNaN;
    invalid_[k] = 1;
}

std::size_t Heatmap::invalid_count() const
{
    return static_cast<std::size_t>(std::count(invalid_.begin(), invalid_.end(), std::uint8_t{1}));
}

std::pair<double, double> Heatmap::value_range() const
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (invalid_[k])
            continue;
        lo = std::min(lo, values_[k]);
        hi = std::max(hi, values_[k]);
    }
    if (lo > hi)
        throw DomainError("heatmap has no valid cells");
    return {lo, hi};
}

bool Heatmap::operator==(const Heatmap& o) const
{
    if (az_pixels_ != o.az_pixels_ || el_pixels_ != o.el_pixels_ || az_range_ != o.az_range_ ||
        el_range_ != o.el_range_ || band_label_ != o.band_label_ || normalized_ != o.normalized_ ||
        complete_ != o.complete_ || invalid_ != o.invalid_)
        return false;
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (!invalid_[k] && std::memcmp(&values_[k], &o.values_[k], sizeof(double)) != 0)
            return false;
    return true;
}

std::pair<int, int> argmax(const Heatmap& map)
{
    std::pair<int, int> best{-1, -1};
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i_el = map.el_pixels() - 1; i_el >= 0; --i_el)
        for (int i_az = 0; i_az < map.az_pixels(); ++i_az)
            if (map.valid(i_az, i_el) && map.at(i_az, i_el) > best_v) {
                best_v = map.at(i_az, i_el);
                best = {i_az, i_el};
            }
    if (best.first < 0)
        throw DomainError("argmax of a heatmap with no valid cells");
    return best;
}

std::vector<Heatmap> normalize_clip(const std::vector<Heatmap>& maps, std::size_t reference_index,
                                    std::vector<std::string>* warnings)
{
    if (reference_index >= maps.size())
        throw ConfigError("normalization reference index " + std::to_string(reference_index) + " out of range");
    const auto& ref = maps[reference_index];
    for (const auto& m : maps)
        if (!m.same_shape(ref))
            throw ConfigError("normalize_clip: heatmaps differ in shape (" + std::to_string(m.az_pixels()) + "x" +
                              std::to_string(m.el_pixels()) + " vs " + std::to_string(ref.az_pixels()) + "x" +
                              std::to_string(ref.el_pixels()) + ")");

    const auto [lo, hi] = ref.value_range();
    const bool flat = !(hi > lo);
    if (flat && warnings)
        warnings->push_back("reference heatmap is flat; normalized output set to 0.5");

    std::vector<Heatmap> out;
    out.reserve(maps.size());
    for (const auto& m : maps) {
        Heatmap n = m;
        n.set_normalized(true);
        for (int i_el = 0; i_el < m.el_pixels(); ++i_el)
            for (int i_az = 0; i_az < m.az_pixels(); ++i_az) {
                if (!m.valid(i_az, i_el))
                    continue;
                const double v = flat ? 0.5 : (m.at(i_az, i_el) - lo) / (hi - lo);
                n.set(i_az, i_el, std::clamp(v, 0.0, 1.0));
            }
        out.push_back(std::move(n));
    }
    return out;
}

std::string encode_pgm(const Heatmap& map)
{
    require_normalized(map, "PGM export");
    std::ostringstream hdr;
    hdr << "P5\n# az_deg " << shortest(map.az_range().min) << ' ' << shortest(map.az_range().max) << " el_deg "
        << shortest(map.el_range().min) << ' ' << shortest(map.el_range().max)
        << " row0=el_max col0=az_min\n"
        << map.az_pixels() << ' ' << map.el_pixels() << "\n65535\n";
    std::string bytes = hdr.str();
    bytes.reserve(bytes.size() + 2 * map.values().size());
    for (int i_el = map.el_pixels() - 1; i_el >= 0; --i_el)
        for (int i_az = 0; i_az < map.az_pixels(); ++i_az) {
            const double v = map.valid(i_az, i_el) ? std::clamp(map.at(i_az, i_el), 0.0, 1.0) : 0.0;
            const auto s = static_cast<std::uint16_t>(std::lround(v * 65535.0));
            bytes.push_back(static_cast<char>(s >> 8));
            bytes.push_back(static_cast<char>(s & 0xFF));
        }
    return bytes;
}

void export_pgm(const Heatmap& map, const std::filesystem::path& path)
{
    write_file(path, encode_pgm(map));
}

Heatmap read_pgm(const std::filesystem::path& path)
{
    const std::string bytes = read_file(path);
    std::size_t pos = 0;
    Interval az{0, 0}, el{0, 0};
    bool have_extent = false;

    auto next_token = [&]() -> std::string {
        for (;;) {
            while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])))
                ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                const auto eol = bytes.find('\n', pos);
                std::istringstream c(bytes.substr(pos + 1, eol - pos - 1));
                std::string tag;
                double a0, a1, e0, e1;
                std::string tag2;
                if (c >> tag >> a0 >> a1 >> tag2 >> e0 >> e1 && tag == "az_deg" && tag2 == "el_deg") {
                    az = {a0, a1};
                    el = {e0, e1};
                    have_extent = true;
                }
                pos = eol == std::string::npos ? bytes.size() : eol + 1;
                continue;
            }
            const auto start = pos;
            while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
                ++pos;
            return bytes.substr(start, pos - start);
        }
    };

    if (next_token() != "P5")
        throw IoError(path.string() + ": not a binary PGM");
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    ++pos; // single whitespace before raster
    if (maxval != 65535)
        throw IoError(path.string() + ": expected 16-bit PGM");
    if (bytes.size() - pos != static_cast<std::size_t>(w) * h * 2)
        throw IoError(path.string() + ": truncated raster");
    if (!have_extent) {
        az = {0, static_cast<double>(w)};
        el = {0, static_cast<double>(h)};
    }

    Heatmap map(w, h, az, el);
    map.set_normalized(true);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto hi = static_cast<unsigned char>(bytes[pos++]);
            const auto lo = static_cast<unsigned char>(bytes[pos++]);
            map.set(x, h - 1 - y, ((hi << 8) | lo) / 65535.0);
        }
    return map;
}

std::string encode_csv(const Heatmap& map)
{
    std::ostringstream out;
    out << "# dfscan-heatmap units=" << (map.normalized() ? "normalized" : "dBm") << " az_range="
        << shortest(map.az_range().min) << ':' << shortest(map.az_range().max)
        << " el_range=" << shortest(map.el_range().min) << ':' << shortest(map.el_range().max)
        << " complete=" << (map.complete() ? 1 : 0) << " rows=el_descending"
        << " band=" << sanitize_label(map.band_label()) << '\n';
    out << "el_deg\\az_deg";
    for (int i_az = 0; i_az < map.az_pixels(); ++i_az)
        out << ',' << shortest(map.az_center(i_az));
    out << '\n';
    for (int i_el = map.el_pixels() - 1; i_el >= 0; --i_el) {
        out << shortest(map.el_center(i_el));
        for (int i_az = 0; i_az < map.az_pixels(); ++i_az)
            out << ',' << (map.valid(i_az, i_el) ? shortest(map.at(i_az, i_el)) : std::string("nan"));
        out << '\n';
    }
    return out.str();
}

void export_csv(const Heatmap& map, const std::filesystem::path& path)
{
    write_file(path, encode_csv(map));
}

Heatmap parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            detail::strip_cr(line);
            if (!detail::trim(line).empty())
                return true;
        }
        return false;
    };

    if (!next_line() || !line.starts_with("# dfscan-heatmap"))
        throw ParseError("missing `# dfscan-heatmap` metadata line", line_no);

    bool normalized = false, complete = true;
    std::optional<Interval> az, el;
    std::string band;
    {
        std::istringstream meta(line.substr(2));
        std::string kv;
        meta >> kv;
        while (meta >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                continue;
            const auto key = kv.substr(0, eq);
            const auto val = kv.substr(eq + 1);
            if (key == "units")
                normalized = val == "normalized";
            else if (key == "az_range")
                az = parse_interval(val);
            else if (key == "el_range")
                el = parse_interval(val);
            else if (key == "complete")
                complete = val != "0";
            else if (key == "band")
                band = val;
        }
    }
    if (!az || !el)
        throw ParseError("metadata lacks az_range/el_range", line_no);

    if (!next_line())
        throw ParseError("missing azimuth header row", line_no);
    const int az_pixels = static_cast<int>(detail::split(line, ',').size()) - 1;
    if (az_pixels < 1)
        throw ParseError("header row has no azimuth columns", line_no);

    std::vector<std::vector<double>> rows; // el descending
    while (next_line()) {
        const auto fields = detail::split(line, ',');
        if (static_cast<int>(fields.size()) != az_pixels + 1)
            throw ParseError("expected " + std::to_string(az_pixels + 1) + " fields", line_no);
        std::vector<double> row;
        for (std::size_t k = 1; k < fields.size(); ++k) {
            auto v = detail::parse_double(fields[k]);
            if (!v)
                throw ParseError("bad value `" + std::string(fields[k]) + "`", line_no);
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError("heatmap CSV has no data rows", line_no);

    const int el_pixels = static_cast<int>(rows.size());
    Heatmap map(az_pixels, el_pixels, *az, *el, band);
    map.set_normalized(normalized);
    map.set_complete(complete);
    for (int r = 0; r < el_pixels; ++r)
        for (int i_az = 0; i_az < az_pixels; ++i_az)
            map.set(i_az, el_pixels - 1 - r, rows[r][i_az]);
    return map;
}

Heatmap read_csv(const std::filesystem::path& path)
{
    try {
        return parse_csv(read_file(path));
    } catch (const ParseError& e) {
        throw e.in(path.string());
    }
}

} // namespace dfscan
