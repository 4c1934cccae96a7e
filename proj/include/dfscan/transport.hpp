#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include "dfscan/device.hpp"
#include "dfscan/protocol.hpp"
#include "dfscan/rotor.hpp"

namespace dfscan {

/// Half-duplex line link: one request line out, one response line back.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string transact(std::string_view request_line) = 0;
};

/// In-process link to a SimulatedDevice.
class DeviceTransport final : public Transport {
public:
    explicit DeviceTransport(SimulatedDevice& device) : device_(device) {}
    std::string transact(std::string_view request_line) override { return device_.handle_line(request_line); }

private:
    SimulatedDevice& device_;
};

/// Writes every exchange as `> request` / `< response` lines.
class TranscriptTransport final : public Transport {
public:
    TranscriptTransport(Transport& inner, std::ostream& log) : inner_(inner), log_(log) {}
    std::string transact(std::string_view request_line) override;

private:
    Transport& inner_;
    std::ostream& log_;
};

/// POSIX serial port (USB-CDC) in raw 8N1 mode.
class SerialPort final : public Transport {
public:
    /// Throws TransportError if the port cannot be opened or configured.
    SerialPort(const std::string& path, int baud = 115200,
               std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
    ~SerialPort() override;

    SerialPort(const SerialPort&) = delete;
    SerialPort& operator=(const SerialPort&) = delete;

    std::string transact(std::string_view request_line) override;

private:
    int fd_ = -1;
    std::string path_;
    std::chrono::milliseconds timeout_;
    std::string pending_;
};

/// Answers request lines arriving on `fd` until EOF or `stop` is set.
/// Used to put a SimulatedDevice behind a pseudo-terminal.
void serve_device(SimulatedDevice& device, int fd, const std::atomic<bool>& stop);

/// Host-side rotor driver speaking the line protocol.
class RotorClient {
public:
    RotorClient(Transport& transport, RotorConfig config);

    const RotorConfig& config() const { return config_; }

    /// Sends HOME and reads back the zeroed counters. Throws StateError on
    /// an ERR reply.
    void home();

    /// True once a POS? query succeeds (device already homed).
    bool query_homed();

    /// Relative move. Returns the raw reply (OK or ERR).
    protocol::Response move(std::int64_t az_delta, std::int64_t el_delta);

    /// Queries POS? and caches it. Throws StateError when unhomed.
    protocol::Pos position();
    protocol::Lim limits();
    void stop();

    AngularPose pose() const;
    std::int64_t az_steps() const { return az_steps_; }
    std::int64_t el_steps() const { return el_steps_; }

private:
    protocol::Response request(const protocol::Command& cmd);

    Transport& transport_;
    RotorConfig config_;
    std::int64_t az_steps_ = 0;
    std::int64_t el_steps_ = 0;
    bool homed_ = false;
};

} // namespace dfscan
