#pragma once

#include <stdexcept>
#include <string>

namespace heterokink {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (wrong dimension, invalid parameters, bad config).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A numerical procedure failed to deliver a result.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class NotEnoughCrossings : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class NewtonDiverged : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class MeshBudget : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class ContinuationStalled : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class NonpositiveWidth : public DomainError {
public:
    using DomainError::DomainError;
};

class FewerThanTwoCrossings : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class MismatchedFamilies : public Error {
public:
    using Error::Error;
};

}  // namespace heterokink
