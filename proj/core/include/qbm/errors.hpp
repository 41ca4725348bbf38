// errors.hpp: exception hierarchy shared by all qbm modules

#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

/// Invalid configuration or input arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Any numerical failure: quadrature, integrator, resolution, truncation (exit code 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double estimate, double tolerance)
        : NumericalError(what + " (error estimate " + std::to_string(estimate) + ", tolerance "
                         + std::to_string(tolerance) + ")"),
          error_estimate(estimate) {}
    double error_estimate;
};

class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IntegratorError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class TruncationError : public NumericalError {
public:
    TruncationError(const std::string& what, double time)
        : NumericalError(what), spill_time(time) {}
    double spill_time;
};

/// Operation not valid in the current dynamical regime (exit code 3).
class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested time lies outside a table's grid.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Requested capability (moment order, state kind) is not supported.
class CapabilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace qbm
