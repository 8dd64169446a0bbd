#pragma once

#include <stdexcept>
#include <string>

namespace philap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range user input (config files, parameters, samples).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Syntax or name-resolution error in the expression language.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& message, std::size_t offset)
        : ConfigError(message + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// A root finder or quadrature failed to meet its tolerance.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation
/// (e.g. support bounds of an identically vanishing weight).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A structural hypothesis on phi, f or the growth exponents does not hold.
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

/// Preconditions of an existence construction are not met.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A sub/supersolution inequality fails on the grid.
class ConstructionFailure : public Error {
public:
    using Error::Error;
};

/// The clamped fixed-point iteration hit its iteration cap.
class NonConvergence : public Error {
public:
    using Error::Error;
};

}  // namespace philap
