#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rte {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (usage-level failure).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry, e.g. a direction requested at its own source point.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (log of a nonpositive sample).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative method stopped at its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double last_residual)
      : Error(what), iterations_(iterations), last_residual_(last_residual) {}
  std::size_t iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  std::size_t iterations_;
  double last_residual_;
};

/// Line search could not produce a decrease.
class StagnationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rte
