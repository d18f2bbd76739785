#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilcshape {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration / input files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Anything that goes wrong inside a numerical routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// ILC error grew or became non-finite.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : NumericalError(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class RootFindingError : public NumericalError {
 public:
  RootFindingError(const std::string& what, std::vector<double> residuals)
      : NumericalError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Frequency response requested exactly at a pole on the unit circle.
class PoleOnGridError : public NumericalError {
 public:
  PoleOnGridError(const std::string& what, double omega)
      : NumericalError(what), omega_(omega) {}
  double omega() const noexcept { return omega_; }

 private:
  double omega_;
};

class UnstableSystemError : public NumericalError {
 public:
  UnstableSystemError(const std::string& what, std::vector<double> magnitudes)
      : NumericalError(what), magnitudes_(std::move(magnitudes)) {}
  const std::vector<double>& pole_magnitudes() const noexcept { return magnitudes_; }

 private:
  std::vector<double> magnitudes_;
};

/// Plant trial failed: zero response, length mismatch, dead child process.
class PlantError : public Error {
 public:
  using Error::Error;
};

/// Desired loop gain has lower relative order than the plant, so the
/// controller that realizes it would be non-causal.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(const std::string& what, int plant_order, int target_order)
      : Error(what), plant_order_(plant_order), target_order_(target_order) {}
  int plant_order() const noexcept { return plant_order_; }
  int target_order() const noexcept { return target_order_; }

 private:
  int plant_order_;
  int target_order_;
};

}  // namespace ilcshape
