#pragma once

#include <stdexcept>
#include <string>

namespace ztbench {

// Invalid configuration or out-of-contract argument. CLI maps this to exit 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input data (dataset rows, fixture files). CLI maps this to exit 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure. CLI maps this to exit 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ztbench
