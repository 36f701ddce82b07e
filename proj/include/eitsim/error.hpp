#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eitsim {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}
  /// Best residuals found, in target order (peak, fwhm_hz, delay_s).
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// A sampling grid is too coarse for the requested quantity.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class AliasingError : public Error {
 public:
  using Error::Error;
};

/// Energy bookkeeping of the Maxwell–Bloch integration became non-physical.
class IntegratorError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class NoPeakError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> residuals = {})
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class StatisticsError : public Error {
 public:
  StatisticsError(const std::string& what, long long required_trials)
      : Error(what), required_trials_(required_trials) {}
  long long required_trials() const noexcept { return required_trials_; }

 private:
  long long required_trials_;
};

/// Aggregated configuration validation failure; lists every violation.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace eitsim
