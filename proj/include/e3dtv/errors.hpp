#pragma once

#include <stdexcept>

namespace e3dtv {

/// Invalid solver or run configuration, detected before any compute.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite iterate or inner-solver breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or corrupted on-disk data.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace e3dtv
