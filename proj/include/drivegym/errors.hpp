#pragma once

#include <stdexcept>
#include <string>

namespace drivegym {

/// Invalid or inconsistent configuration (bad parameters, unknown keys,
/// incompatible motor/converter pairing).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or a failed integration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An action or argument outside its admissible set.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// API misuse, e.g. stepping an environment whose episode is done.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace drivegym
