#pragma once

#include <stdexcept>
#include <string>

namespace nlx {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the admissible range of its model.
class ParameterDomainError : public Error {
public:
    using Error::Error;
};

/// An iterative method did not converge or a factorization broke down.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds a configured capacity limit.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// No exact sampler exists for the requested subordinator.
class UnsupportedSamplerError : public Error {
public:
    using Error::Error;
};

/// A caller-declared contract (e.g. a potential bound) was violated at run time.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Result would leave the representable or admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A potential evaluates to a non-finite value on a grid point.
class SingularityOnGridError : public Error {
public:
    using Error::Error;
};

/// Precondition of a check could not be established.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or command line.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace nlx
