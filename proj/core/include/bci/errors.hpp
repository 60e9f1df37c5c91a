#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bci {

// Base class for every domain error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SelfTransaction : public Error {
public:
    using Error::Error;
};

class NegativeAmount : public Error {
public:
    using Error::Error;
};

class PeerOutOfRange : public Error {
public:
    using Error::Error;
};

class NonSquare : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NonPositiveInput : public Error {
public:
    using Error::Error;
};

class InvalidAlpha : public Error {
public:
    using Error::Error;
};

class ReplicationTooLarge : public Error {
public:
    using Error::Error;
};

// Input parsing failure; line/field are 1-based, 0 means not applicable.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0, std::size_t field = 0)
        : Error(what), line_(line), field_(field) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::size_t field_;
};

// Simulation config rejected; names the offending field.
class InvalidConfig : public Error {
public:
    InvalidConfig(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace bci
