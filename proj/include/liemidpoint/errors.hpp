#pragma once

#include <stdexcept>
#include <string>

namespace lmp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical precondition was violated (non-skew matrix passed to vee,
/// rotation at the Cayley singularity, gimbal-degenerate Euler extraction, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Run configuration is invalid or inconsistent. CLI exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An implicit solve failed to converge. Carries the last residual. CLI exit code 2.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : Error(what), residual(residual), iterations(iterations) {}

    double residual = 0.0;
    int iterations = 0;
};

/// The solvability guard rejected the step size (strict mode only).
class GuardError : public SolverError {
public:
    GuardError(const std::string& what, double quantity)
        : SolverError(what, 0.0, 0), quantity(quantity) {}

    double quantity = 0.0;
};

/// A conservation check failed. CLI exit code 3.
class InvariantViolation : public Error {
public:
    InvariantViolation(const std::string& what, double drift)
        : Error(what), drift(drift) {}

    double drift = 0.0;
};

} // namespace lmp
