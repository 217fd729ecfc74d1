#pragma once

#include <stdexcept>

namespace ctxpoe {

// Invalid configuration value or command usage.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated internal contract (bad numerics, impossible state).
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ctxpoe
