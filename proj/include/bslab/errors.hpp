#pragma once

#include <stdexcept>
#include <string>

namespace bslab {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or configuration (CLI exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

// Point on a branch cut, singular resolvent, truncation tail too heavy.
class DomainError : public Error {
public:
    using Error::Error;
};

// Solver did not converge or failed its backward-error certificate (exit 3).
class NumericalFailure : public Error {
public:
    using Error::Error;
};

// A checked identity or correspondence did not hold (exit 1).
class TheoremViolation : public Error {
public:
    using Error::Error;
};

class AssumptionViolated : public Error {
public:
    using Error::Error;
};

} // namespace bslab
