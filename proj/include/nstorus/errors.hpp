#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nstorus {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible field shapes (dim / truncation / component count).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Operation requires a zero-mean field and the mean mode exceeds tolerance.
class NonZeroMeanError : public Error {
 public:
  NonZeroMeanError(double mean_abs, double tol)
      : Error("inv_laplacian: |f_0| = " + std::to_string(mean_abs) +
              " exceeds zero-mean tolerance " + std::to_string(tol)),
        mean_abs(mean_abs),
        tol(tol) {}
  double mean_abs;
  double tol;
};

/// Fixed-point iteration residuals grew for several consecutive sweeps.
class DivergedError : public Error {
 public:
  DivergedError(int iterations, std::vector<double> residuals)
      : Error("fixed-point iteration diverged after " + std::to_string(iterations) +
              " sweeps"),
        iterations(iterations),
        residuals(std::move(residuals)) {}
  int iterations;
  std::vector<double> residuals;
};

/// Not enough spectral data above the floor to fit a decay rate.
class TooFewModesError : public Error {
 public:
  using Error::Error;
};

/// Field is constant (nothing to fit a decay against).
class DegenerateFieldError : public Error {
 public:
  using Error::Error;
};

/// Duhamel history does not cover the requested interval.
class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

/// Time grid too coarse for the requested operation.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or manifest; remembers the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field_name, const std::string& msg)
      : Error(msg), field(std::move(field_name)) {}
  std::string field;
};

/// Unknown or inapplicable initial-data generator.
class GeneratorError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace nstorus
