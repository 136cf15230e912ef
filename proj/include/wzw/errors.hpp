#pragma once

#include <stdexcept>
#include <string>

namespace wzw {

// Fixed-point iteration ran out of sweeps before reaching tolerance.
class picard_error : public std::runtime_error {
public:
    picard_error(std::string msg, double residual, int sweeps)
        : std::runtime_error(std::move(msg)), last_residual(residual), sweeps_used(sweeps) {}
    double last_residual;
    int sweeps_used;
};

// An exponent left the range where exp() is representable in double.
class overflow_error : public std::runtime_error {
public:
    explicit overflow_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Config file could not be parsed or contained invalid values.
class config_error : public std::runtime_error {
public:
    config_error(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    int line_number;
};

} // namespace wzw
