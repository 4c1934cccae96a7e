#pragma once

#include <stdexcept>
#include <string>

namespace dfscan {

/// Base for every error raised by the library. The CLI maps the concrete
/// type to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Angle or step count outside configured travel.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration, plan, scene file or flags.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operation not permitted in the current state (e.g. rotor not homed).
class StateError : public Error {
public:
    using Error::Error;
};

/// Device link failure: port missing, timeout, unexpected reply.
class TransportError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed text input, with 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, const std::string& context = {})
        : Error(format(message, line, context)), message_(message), line_(line) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

    /// Same error, prefixed with e.g. the file name.
    ParseError in(const std::string& context) const { return ParseError(message_, line_, context); }

private:
    static std::string format(const std::string& message, std::size_t line, const std::string& context)
    {
        std::string out = context.empty() ? std::string{} : context + ": ";
        if (line)
            out += "line " + std::to_string(line) + ": ";
        return out + message;
    }

    std::string message_;
    std::size_t line_;
};

} // namespace dfscan
