#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neuromix {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

// API used out of order, e.g. backward() on an empty tape.
class StateError : public Error {
public:
    using Error::Error;
};

// NaN/Inf or a value outside a function's domain.
class NumericError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration or hyperparameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed input data.
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed text input. `position` is a 1-based line or token index.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Checkpoint container that cannot be decoded.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace neuromix
