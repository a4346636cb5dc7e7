#pragma once

#include <stdexcept>
#include <string>

namespace cuspforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical design loop cannot meet its tolerance.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class LatticeError : public Error {
 public:
  using Error::Error;
};

/// A curvature sign condition (K <= 0) was observed to fail.
class CurvatureViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cuspforge
