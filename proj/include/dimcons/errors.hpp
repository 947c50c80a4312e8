#pragma once

#include <stdexcept>
#include <string>

namespace dimcons {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live in free groups of different rank.
class SpecMismatch : public Error {
public:
    using Error::Error;
};

/// A boundary approximation is too shallow to decide the requested quantity.
class InsufficientDepth : public Error {
public:
    using Error::Error;
};

/// Gromov product of a boundary point requested at a base other than the identity.
class UnsupportedBase : public Error {
public:
    using Error::Error;
};

/// The operation is not available for this measure or method.
class Unsupported : public Error {
public:
    using Error::Error;
};

/// Sampling ran out of its step budget; callers may retry with a larger budget.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// Invalid measure or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace dimcons
