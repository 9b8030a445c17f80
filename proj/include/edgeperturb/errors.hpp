#ifndef EDGEPERTURB_ERRORS_HPP
#define EDGEPERTURB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ep {

// Exit-code mapping used by the CLI: usage 1, data 2, numerical 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ep

#endif
