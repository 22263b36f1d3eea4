#pragma once

#include <stdexcept>
#include <string>

namespace qflow {

/// Invalid scenario configuration (bad key, bad value, inconsistent sizes).
/// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown during a run (singular matrix, trajectory crossing,
/// non-finite state, CFL violation). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qflow
