#pragma once

#include <stdexcept>
#include <string>

namespace conclab {

/// Bad or inconsistent user-facing configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical preconditions violated: sigma(Q) >= 1, coefficient bounds
/// breached mid-run, degenerate geometry (CLI exit code 3).
class CertificationError : public std::runtime_error {
 public:
  explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver ran out of iterations (CLI exit code 4).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual(last_residual) {}
  double last_residual;
};

}  // namespace conclab
