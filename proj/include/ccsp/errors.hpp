#pragma once

#include <stdexcept>
#include <string>

namespace ccsp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-side precondition was not met (bad arguments, malformed input).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An internal bound or invariant failed; always a bug or a model violation.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

// Simulator errors.
class BandwidthViolation : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};
class NonTermination : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};
class DemandViolation : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};
class ArityViolation : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};
class WeightViolation : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};

/// Raised inside sparse multiplication when the output-density estimate is too
/// small to place every duplicated subtask; the doubling loop catches it.
class DensityUnderestimate : public Error {
public:
    using Error::Error;
};

// Algorithm preconditions.
class EmptySources : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};
class FamilyTooSmall : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};
class HitFailure : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};
class WeightedInput : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};
class Disconnected : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};
class InvalidSpec : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class ParseError : public PreconditionError {
public:
    ParseError(std::size_t line, const std::string& what)
        : PreconditionError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {
template <class E = InvariantViolation>
inline void check(bool ok, const std::string& what) {
    if (!ok) throw E(what);
}
}  // namespace detail

}  // namespace ccsp
