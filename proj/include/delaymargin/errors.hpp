#pragma once

#include <stdexcept>
#include <string>

namespace delaymargin {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input values: non-finite entries, negative step sizes, malformed files.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Incompatible matrix shapes.
class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Argument outside the mathematical domain of an operation (e.g. gain p <= 1).
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A requested certificate or inequality cannot be satisfied.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// A history or trace does not cover the requested time window.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical method failed to converge.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, long iterations = -1)
        : Error(what), iterations_(iterations) {}

    /// Iteration count at failure, or -1 if not applicable.
    long iterations() const { return iterations_; }

private:
    long iterations_;
};

}  // namespace delaymargin
