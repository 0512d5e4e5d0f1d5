#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quirkprint {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based; 0 when no line applies.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DuplicateIdError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class PlaceholderError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Two signatures built over different attribute lists.
class SchemaMismatch : public Error {
public:
    using Error::Error;
};

// No position is non-NA in both signatures, so no distance exists.
class IncomparableError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace quirkprint
