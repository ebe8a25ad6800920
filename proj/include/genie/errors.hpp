#pragma once

#include <stdexcept>

namespace genie {

// Bad user-facing configuration (CLI flags, TOML files, malformed inputs).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric routine produced NaN/Inf or failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run-level invariant was violated (oracle below threshold, broken report).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace genie
