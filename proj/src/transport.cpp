#include "dfscan/transport.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <termios.h>
#include <unistd.h>

#include <limits>

#include "dfscan/error.hpp"

namespace dfscan {

using namespace protocol;

namespace {

std::string without_newline(std::string_view s)
{
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r'))
        s.remove_suffix(1);
    return std::string(s);
}

speed_t to_speed(int baud)
{
    switch (baud) {
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    case 230400: return B230400;
    default: throw ConfigError("unsupported baud rate " + std::to_string(baud));
    }
}

void write_all(int fd, std::string_view data, const std::string& what)
{
    while (!data.empty()) {
        const auto n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN)
                continue;
            throw TransportError(what + ": write failed: " + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

} // namespace

std::string TranscriptTransport::transact(std::string_view request_line)
{
    log_ << "> " << without_newline(request_line) << '\n';
    auto reply = inner_.transact(request_line);
    log_ << "< " << without_newline(reply) << '\n';
    return reply;
}

SerialPort::SerialPort(const std::string& path, int baud, std::chrono::milliseconds timeout)
    : path_(path), timeout_(timeout)
{
    const speed_t speed = to_speed(baud);
    fd_ = ::open(path.c_str(), O_RDWR | O_NOCTTY | O_CLOEXEC);
    if (fd_ < 0)
        throw TransportError("cannot open serial port " + path + ": " + std::strerror(errno));

    termios tio{};
    if (::tcgetattr(fd_, &tio) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        throw TransportError("not a serial device " + path + ": " + err);
    }
    ::cfmakeraw(&tio);
    ::cfsetispeed(&tio, speed);
    ::cfsetospeed(&tio, speed);
    tio.c_cflag |= CLOCAL | CREAD;
    tio.c_cc[VMIN] = 0;
    tio.c_cc[VTIME] = 0;
    if (::tcsetattr(fd_, TCSANOW, &tio) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        throw TransportError("cannot configure serial port " + path + ": " + err);
    }
}

SerialPort::~SerialPort()
{
    if (fd_ >= 0)
        ::close(fd_);
}

std::string SerialPort::transact(std::string_view request_line)
{
    write_all(fd_, request_line, path_);

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto nl = pending_.find('\n');
        if (nl != std::string::npos) {
            auto line = pending_.substr(0, nl + 1);
            pending_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                                 std::chrono::steady_clock::now());
        if (left.count() <= 0)
            throw TransportError(path_ + ": timed out waiting for reply");
        pollfd pfd{fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (rc < 0 && errno != EINTR)
            throw TransportError(path_ + ": poll failed: " + std::strerror(errno));
        if (rc <= 0)
            continue;
        char buf[256];
        const auto n = ::read(fd_, buf, sizeof buf);
        if (n > 0) {
            pending_.append(buf, static_cast<std::size_t>(n));
            continue;
        }
        // A pty whose peer has gone away reports EIO rather than EOF.
        if (n == 0 || errno == EIO)
            throw TransportError(path_ + ": device closed the link");
        if (errno != EAGAIN && errno != EINTR)
            throw TransportError(path_ + ": read failed: " + std::strerror(errno));
    }
}

void serve_device(SimulatedDevice& device, int fd, const std::atomic<bool>& stop)
{
    std::string pending;
    while (!stop.load()) {
        pollfd pfd{fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, 50);
        if (rc < 0 && errno != EINTR)
            return;
        if (rc <= 0)
            continue;
        char buf[256];
        const auto n = ::read(fd, buf, sizeof buf);
        if (n <= 0) {
            if (n < 0 && (errno == EAGAIN || errno == EINTR))
                continue;
            return;
        }
        pending.append(buf, static_cast<std::size_t>(n));
        for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n')) {
            const auto reply = device.handle_line(std::string_view(pending).substr(0, nl + 1));
            pending.erase(0, nl + 1);
            write_all(fd, reply, "device");
        }
    }
}

RotorClient::RotorClient(Transport& transport, RotorConfig config) : transport_(transport), config_(std::move(config))
{
    config_.validate();
}

Response RotorClient::request(const Command& cmd)
{
    return parse_response(transport_.transact(encode_command(cmd)));
}

void RotorClient::home()
{
    homed_ = false;
    const auto reply = request(Home{});
    if (const auto* err = std::get_if<Err>(&reply))
        throw StateError("HOME failed: " + describe(err->code));
    if (!std::holds_alternative<Ok>(reply))
        throw TransportError("HOME: unexpected reply " + encode_response(reply));
    position();
}

bool RotorClient::query_homed()
{
    const auto reply = request(PosQuery{});
    if (const auto* p = std::get_if<Pos>(&reply)) {
        az_steps_ = p->az_steps;
        el_steps_ = p->el_steps;
        homed_ = true;
        return true;
    }
    homed_ = false;
    return false;
}

Response RotorClient::move(std::int64_t az_delta, std::int64_t el_delta)
{
    constexpr auto lo = std::numeric_limits<std::int32_t>::min();
    constexpr auto hi = std::numeric_limits<std::int32_t>::max();
    if (az_delta < lo || az_delta > hi || el_delta < lo || el_delta > hi)
        throw RangeError("MOVE delta exceeds the signed 32-bit wire range");
    auto reply = request(Move{static_cast<std::int32_t>(az_delta), static_cast<std::int32_t>(el_delta)});
    if (std::holds_alternative<Ok>(reply)) {
        az_steps_ += az_delta;
        el_steps_ += el_delta;
    } else {
        homed_ = false;
    }
    return reply;
}

Pos RotorClient::position()
{
    const auto reply = request(PosQuery{});
    if (const auto* p = std::get_if<Pos>(&reply)) {
        az_steps_ = p->az_steps;
        el_steps_ = p->el_steps;
        homed_ = true;
        return *p;
    }
    homed_ = false;
    if (const auto* err = std::get_if<Err>(&reply))
        throw StateError("POS? failed: " + describe(err->code));
    throw TransportError("POS?: unexpected reply " + encode_response(reply));
}

Lim RotorClient::limits()
{
    const auto reply = request(LimQuery{});
    if (const auto* l = std::get_if<Lim>(&reply))
        return *l;
    throw TransportError("LIM?: unexpected reply " + encode_response(reply));
}

void RotorClient::stop()
{
    const auto reply = request(Stop{});
    if (!std::holds_alternative<Ok>(reply))
        throw TransportError("STOP: unexpected reply " + encode_response(reply));
}

AngularPose RotorClient::pose() const
{
    if (!homed_)
        throw StateError("rotor pose is undefined until homed");
    return {steps_to_angle(config_, Axis::az, az_steps_), steps_to_angle(config_, Axis::el, el_steps_)};
}

} // namespace dfscan
