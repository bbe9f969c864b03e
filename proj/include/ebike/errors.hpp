#pragma once

#include <stdexcept>
#include <string>

namespace ebike {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Input does not follow the documented column/key contract.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical or categorical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// A caller-side precondition was violated (e.g. empty prompt or narrative).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Missing or inconsistent configuration; always raised before any side effect.
class ConfigError : public Error {
public:
    using Error::Error;
};

// HTTP transport failed after all retries. status() is 0 when no response
// was ever received.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int status)
        : Error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

// The endpoint answered, but not in the expected wire format.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// An agent could not turn a backend reply into a value.
class ExtractionError : public Error {
public:
    using Error::Error;
};

}  // namespace ebike
