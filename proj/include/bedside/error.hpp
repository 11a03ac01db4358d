#pragma once

#include <stdexcept>
#include <string>

namespace bedside {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document; the message names the offending line or field.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a domain constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Operation is not allowed in the target's current state.
class ConflictError : public Error {
public:
    using Error::Error;
};

} // namespace bedside
