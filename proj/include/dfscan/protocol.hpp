#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "dfscan/error.hpp"

namespace dfscan::protocol {

// Wire format: ASCII, uppercase keyword, single-space separated decimal
// integers, one LF-terminated line per message. Every command is answered
// by exactly one response line.
//
//   host -> device            device -> host
//   HOME                      OK
//   MOVE <d_az> <d_el>        ERR <code>
//   POS?                      POS <az_steps> <el_steps>
//   LIM?                      LIM <az_min 0|1> <el_min 0|1>
//   STOP

/// Error codes carried by `ERR <code>`.
enum class ErrorCode : int {
    unknown_keyword = 1,
    malformed_integer = 2,
    arity = 3,
    limit_strike = 4,
    unhomed = 5,
};

struct Home {
    bool operator==(const Home&) const = default;
};
struct Move {
    std::int32_t az_steps = 0;
    std::int32_t el_steps = 0;
    bool operator==(const Move&) const = default;
};
struct PosQuery {
    bool operator==(const PosQuery&) const = default;
};
struct LimQuery {
    bool operator==(const LimQuery&) const = default;
};
struct Stop {
    bool operator==(const Stop&) const = default;
};

using Command = std::variant<Home, Move, PosQuery, LimQuery, Stop>;

struct Ok {
    bool operator==(const Ok&) const = default;
};
struct Err {
    ErrorCode code{};
    bool operator==(const Err&) const = default;
};
struct Pos {
    std::int64_t az_steps = 0;
    std::int64_t el_steps = 0;
    bool operator==(const Pos&) const = default;
};
struct Lim {
    bool az_min = false;
    bool el_min = false;
    bool operator==(const Lim&) const = default;
};

using Response = std::variant<Ok, Err, Pos, Lim>;

/// Raised by parse_command; `code()` is the ERR code the device answers with.
class ProtocolError : public Error {
public:
    ProtocolError(ErrorCode code, const std::string& what) : Error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

std::string encode_command(const Command& cmd);
Command parse_command(std::string_view line);

std::string encode_response(const Response& resp);
/// Host-side decoding; throws TransportError on anything unexpected.
Response parse_response(std::string_view line);

std::string describe(ErrorCode code);

} // namespace dfscan::protocol
