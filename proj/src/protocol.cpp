#include "dfscan/protocol.hpp"

#include <charconv>
#include <vector>

namespace dfscan::protocol {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

/// Strips exactly one trailing LF (optionally preceded by CR). Any other
/// control byte stays in place and fails later parsing.
std::string_view strip_terminator(std::string_view line)
{
    if (!line.empty() && line.back() == '\n') {
        line.remove_suffix(1);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
    }
    return line;
}

std::vector<std::string_view> tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(' ', start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Strict decimal: optional '-', then digits only.
template <class Int>
bool parse_int(std::string_view tok, Int& out)
{
    if (tok.empty() || tok.front() == '+')
        return false;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

} // namespace

std::string encode_command(const Command& cmd)
{
    return std::visit(overloaded{
                          [](const Home&) -> std::string { return "HOME\n"; },
                          [](const Move& m) -> std::string {
                              return "MOVE " + std::to_string(m.az_steps) + " " + std::to_string(m.el_steps) + "\n";
                          },
                          [](const PosQuery&) -> std::string { return "POS?\n"; },
                          [](const LimQuery&) -> std::string { return "LIM?\n"; },
                          [](const Stop&) -> std::string { return "STOP\n"; },
                      },
                      cmd);
}

Command parse_command(std::string_view line)
{
    line = strip_terminator(line);
    const auto tok = tokens(line);
    const auto keyword = tok.front();
    const auto argc = tok.size() - 1;

    auto expect_args = [&](std::size_t n) {
        if (argc != n)
            throw ProtocolError(ErrorCode::arity, std::string(keyword) + " takes " + std::to_string(n) +
                                                      " argument(s), got " + std::to_string(argc));
    };

    if (keyword == "HOME") {
        expect_args(0);
        return Home{};
    }
    if (keyword == "MOVE") {
        expect_args(2);
        Move m;
        if (!parse_int(tok[1], m.az_steps) || !parse_int(tok[2], m.el_steps))
            throw ProtocolError(ErrorCode::malformed_integer, "MOVE arguments must be signed 32-bit decimals");
        return m;
    }
    if (keyword == "POS?") {
        expect_args(0);
        return PosQuery{};
    }
    if (keyword == "LIM?") {
        expect_args(0);
        return LimQuery{};
    }
    if (keyword == "STOP") {
        expect_args(0);
        return Stop{};
    }
    throw ProtocolError(ErrorCode::unknown_keyword, "unknown keyword `" + std::string(keyword) + "`");
}

std::string encode_response(const Response& resp)
{
    return std::visit(overloaded{
                          [](const Ok&) -> std::string { return "OK\n"; },
                          [](const Err& e) -> std::string {
                              return "ERR " + std::to_string(static_cast<int>(e.code)) + "\n";
                          },
                          [](const Pos& p) -> std::string {
                              return "POS " + std::to_string(p.az_steps) + " " + std::to_string(p.el_steps) + "\n";
                          },
                          [](const Lim& l) -> std::string {
                              return std::string("LIM ") + (l.az_min ? "1" : "0") + " " + (l.el_min ? "1" : "0") +
                                     "\n";
                          },
                      },
                      resp);
}

Response parse_response(std::string_view raw)
{
    const auto line = strip_terminator(raw);
    const auto tok = tokens(line);
    auto bad = [&]() { return TransportError("unexpected device reply `" + std::string(line) + "`"); };

    if (tok[0] == "OK" && tok.size() == 1)
        return Ok{};
    if (tok[0] == "ERR" && tok.size() == 2) {
        int code = 0;
        if (!parse_int(tok[1], code) || code < 1 || code > 5)
            throw bad();
        return Err{static_cast<ErrorCode>(code)};
    }
    if (tok[0] == "POS" && tok.size() == 3) {
        Pos p;
        if (!parse_int(tok[1], p.az_steps) || !parse_int(tok[2], p.el_steps))
            throw bad();
        return p;
    }
    if (tok[0] == "LIM" && tok.size() == 3) {
        auto flag = [&](std::string_view t) {
            if (t == "0")
                return false;
            if (t == "1")
                return true;
            throw bad();
        };
        return Lim{flag(tok[1]), flag(tok[2])};
    }
    throw bad();
}

std::string describe(ErrorCode code)
{
    switch (code) {
    case ErrorCode::unknown_keyword: return "unknown keyword";
    case ErrorCode::malformed_integer: return "malformed integer";
    case ErrorCode::arity: return "argument count mismatch";
    case ErrorCode::limit_strike: return "limit switch strike";
    case ErrorCode::unhomed: return "rotor not homed";
    }
    return "unknown error " + std::to_string(static_cast<int>(code));
}

} // namespace dfscan::protocol
