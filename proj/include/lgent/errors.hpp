#pragma once

#include <stdexcept>
#include <string>

namespace lgent {

// Raised for invalid configuration or parameters supplied by the caller.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for malformed or inconsistent input data (files, records).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an iterative or quadrature computation fails to converge.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), residual(residual) {}
    double residual;
};

}  // namespace lgent
