#ifndef CONFMON_ERROR_HPP
#define CONFMON_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confmon {

/// Base class for every domain failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace confmon

#endif // CONFMON_ERROR_HPP
