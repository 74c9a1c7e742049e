#pragma once

#include <stdexcept>
#include <string>

namespace lsmc {

// Invalid or inconsistent user input: specs, configs, dimension mismatches.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested (payoff, process) pair has no conditional-expectation oracle.
class UnsupportedOracleError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Degenerate designs, failed constructions, non-converged quadrature.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lsmc
