#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lecturelens {

enum class ErrorCategory {
    Config,      // bad flags or config file
    Io,          // filesystem failures
    Parse,       // malformed input data
    Validation,  // well-formed data violating an invariant
    Transport,   // endpoint unreachable / connection dropped
    Backend,     // remote service replied with something unusable
    Analysis,    // pipeline-stage failure
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Parse failure carrying the 1-based line number of the offending record.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorCategory::Parse,
                "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lecturelens
