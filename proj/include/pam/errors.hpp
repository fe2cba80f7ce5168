#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace pam {

/// Invalid model, parameter or configuration input. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A precondition on an operation's arguments did not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The hitting functional is infinite: beta is at or above the effective critical value.
class DivergentFunctional : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Upper and lower truncation brackets disagree about the existence of a root.
class InconsistentBracket : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iterative method did not reach its tolerance.
class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Explicit time stepping produced negative values.
class StabilityViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Slope of log u(t,0) still drifting over the sampled horizon.
class NonStationarySlope : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// File read/write failure. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CLI exit status for an exception: 1 input errors, 2 numerical failures, 3 I/O.
inline int exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return 1;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    return 2;
}

}  // namespace pam
