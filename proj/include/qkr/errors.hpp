#pragma once

#include <stdexcept>
#include <string>

namespace qkr {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid parameter values or malformed run configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Probability reached the edge guard band of the momentum grid.
struct GridError : Error {
  GridError(const std::string& msg, int transform_length)
      : Error(msg), transform_length(transform_length) {}
  int transform_length;
};

// Momentum distribution has too few usable bins for a tail fit.
struct ShapeError : Error {
  using Error::Error;
};

// Curves passed to the collapse test have no common support.
struct RangeError : Error {
  using Error::Error;
};

}  // namespace qkr
