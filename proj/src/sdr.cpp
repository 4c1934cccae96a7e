#include "dfscan/sdr.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "dfscan/error.hpp"
#include "text_util.hpp"

namespace dfscan {

void CaptureRequest::validate() const
{
    if (!(bandwidth_hz > 0.0))
        throw ConfigError("capture bandwidth must be positive");
    if (bandwidth_hz > kMaxCaptureBandwidthHz * (1.0 + 1e-12))
        throw ConfigError("capture bandwidth " + std::to_string(bandwidth_hz / 1e6) +
                          " MHz exceeds the 20 MHz device limit");
    if (!(duration_s > 0.0))
        throw ConfigError("capture duration must be positive");
    if (!(center_hz > 0.0))
        throw ConfigError("capture center frequency must be positive");
}

std::size_t sample_count(const CaptureRequest& request, double sample_rate_hz)
{
    const auto n = std::llround(request.duration_s * sample_rate_hz);
    return static_cast<std::size_t>(std::max<long long>(1, n));
}

double capture_power(std::span<const std::complex<double>> samples)
{
    if (samples.empty())
        throw DomainError("capture_power of an empty capture");
    double acc = 0.0;
    for (const auto& s : samples)
        acc += std::norm(s);
    const double mean = acc / static_cast<double>(samples.size());
    return 10.0 * std::log10(std::max(mean, kPowerFloor));
}

namespace {

void put_f32_le(std::ostream& out, float v)
{
    const auto bits = std::bit_cast<std::uint32_t>(v);
    const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                           static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
    out.write(bytes, 4);
}

float get_f32_le(const unsigned char* p)
{
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

std::filesystem::path header_path(const std::filesystem::path& path)
{
    return std::filesystem::path(path.string() + ".hdr");
}

} // namespace

void write_raw_capture(const IqCapture& capture, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    for (const auto& s : capture.samples) {
        put_f32_le(out, static_cast<float>(s.real()));
        put_f32_le(out, static_cast<float>(s.imag()));
    }
    if (!out)
        throw IoError("write failed: " + path.string());

    std::ofstream hdr(header_path(path));
    if (!hdr)
        throw IoError("cannot write " + header_path(path).string());
    hdr << std::setprecision(17) << "center_hz=" << capture.center_hz << '\n'
        << "rate_hz=" << capture.sample_rate_hz << '\n'
        << "count=" << capture.samples.size() << '\n';
}

IqCapture read_raw_capture(const std::filesystem::path& path)
{
    std::ifstream hdr(header_path(path));
    if (!hdr)
        throw IoError("cannot open " + header_path(path).string());
    std::map<std::string, double> fields;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(hdr, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::trim(line).empty())
            continue;
        const auto eq = line.find('=');
        const auto value = eq == std::string::npos ? std::nullopt : detail::parse_double(line.substr(eq + 1));
        if (!value)
            throw ParseError("expected key=value", line_no, header_path(path).string());
        fields[std::string(detail::trim(line.substr(0, eq)))] = *value;
    }
    for (const char* key : {"center_hz", "rate_hz", "count"})
        if (!fields.count(key))
            throw ParseError(std::string("missing ") + key, 0, header_path(path).string());

    IqCapture cap;
    cap.center_hz = fields["center_hz"];
    cap.sample_rate_hz = fields["rate_hz"];
    const auto count = static_cast<std::size_t>(fields["count"]);

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != count * 8)
        throw IoError(path.string() + ": expected " + std::to_string(count * 8) + " bytes, found " +
                      std::to_string(bytes.size()));
    cap.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        cap.samples[i] = {get_f32_le(&bytes[8 * i]), get_f32_le(&bytes[8 * i + 4])};
    return cap;
}

} // namespace dfscan
