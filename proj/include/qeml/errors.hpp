#pragma once

#include <stdexcept>
#include <string>

namespace qeml {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not match what the operation requires.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain (zero matrix, K < 1, bad p, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A guaranteed inequality failed at runtime. Carries the numbers involved in
/// the message.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// The instance has nothing to witness: a perfect mixer (rho = 0) or a zero map.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Input data failed structural validation (non-unitary, irregular graph, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Requested object would not fit in memory.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace qeml
