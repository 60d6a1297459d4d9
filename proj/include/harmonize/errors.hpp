#pragma once

#include <stdexcept>
#include <string>

namespace harmonize {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain (e.g. Riesz density at tau = 0).
struct DomainError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

// Quadrature gave up before reaching tolerance.
struct QuadratureError : Error {
    QuadratureError(const std::string& what, double achieved)
        : Error(what + " (achieved error " + std::to_string(achieved) + ")"), achieved_error(achieved) {}
    double achieved_error;
};

struct ParseError : Error {
    ParseError(const std::string& what, int line_, int column_)
        : Error(what + " at line " + std::to_string(line_) + ", column " + std::to_string(column_)),
          line(line_),
          column(column_) {}
    int line;
    int column;
};

}  // namespace harmonize
