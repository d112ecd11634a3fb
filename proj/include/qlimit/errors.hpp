#pragma once

#include <stdexcept>
#include <string>

namespace qlimit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operands live on different spaces, or an index is outside its space.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A physical parameter is out of range (negative rate, empty truncation, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Integrator breakdown, singular solves, degenerate null spaces.
class NumericalError : public Error {
public:
    using Error::Error;
};

// A state or trajectory violated one of its invariants beyond tolerance.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

// Malformed or incomplete scenario configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace qlimit
