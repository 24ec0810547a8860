#ifndef TDQMC_ERRORS_HPP
#define TDQMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tdqmc {

// Invalid physics or run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure during propagation (CLI exit code 3).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A wave lost its norm (dtau too large or potential blow-up).
struct CollapsedWave : NumericalError {
    CollapsedWave() : NumericalError("collapsed wave") {}
};

} // namespace tdqmc

#endif
