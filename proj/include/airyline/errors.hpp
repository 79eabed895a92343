#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace airyline {

// Base of every library error. The CLI maps ConfigError to exit code 2 and
// NumericalError (and subclasses) to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// |exp(-zeta)| out of double range; use the scaled evaluation instead.
class AiryRangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Evaluation point within tolerance of a pole; carries the 1-based index of
// the nearest pole (particle or Airy zero).
class PoleProximityError : public NumericalError {
 public:
  PoleProximityError(std::size_t index, double distance, const std::string& what)
      : NumericalError(what), index_(index), distance_(distance) {}
  std::size_t index() const noexcept { return index_; }
  double distance() const noexcept { return distance_; }

 private:
  std::size_t index_;
  double distance_;
};

class InsufficientTableError : public NumericalError {
 public:
  InsufficientTableError(double estimate, double tolerance, const std::string& what)
      : NumericalError(what), estimate_(estimate), tolerance_(tolerance) {}
  double estimate() const noexcept { return estimate_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double estimate_;
  double tolerance_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(double error_estimate, const std::string& what)
      : NumericalError(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class EquilibriumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepFailure : public NumericalError {
 public:
  StepFailure(double t, std::vector<std::size_t> indices, const std::string& what)
      : NumericalError(what), t_(t), indices_(std::move(indices)) {}
  double time() const noexcept { return t_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  double t_;
  std::vector<std::size_t> indices_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace airyline
