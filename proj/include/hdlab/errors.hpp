#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdlab {

/// Base class for every error raised by the library.
class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public LabError {
 public:
  using LabError::LabError;
};

/// Configuration text or values could not be accepted.
class ConfigError : public LabError {
 public:
  ConfigError(const std::string& msg, std::size_t line = 0)
      : LabError(line == 0 ? msg : "line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Rejection placement gave up before all discs were placed.
class PlacementError : public LabError {
 public:
  PlacementError(const std::string& msg, std::size_t placed)
      : LabError(msg + " (placed " + std::to_string(placed) + ")"), placed_(placed) {}
  std::size_t placed() const { return placed_; }

 private:
  std::size_t placed_;
};

/// The event engine detected penetration or another unrecoverable state.
class EngineAbort : public LabError {
 public:
  using LabError::LabError;
};

/// A semiclassical packet straddles a disc edge or hits it at near-grazing incidence.
class GrazingBreakdown : public LabError {
 public:
  using LabError::LabError;
};

/// Not enough samples to form the requested statistic.
class InsufficientStatistics : public LabError {
 public:
  using LabError::LabError;
};

}  // namespace hdlab
