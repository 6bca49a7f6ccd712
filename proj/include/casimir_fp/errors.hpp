// errors.hpp
#pragma once

#include <stdexcept>
#include <string>

namespace casimir_fp {

// Invalid user input: bad units, out-of-range physical values, unknown keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gate voltage above the oxide breakdown voltage.
class BreakdownError : public ConfigError {
 public:
  BreakdownError(double voltage, double breakdown);
  double voltage() const { return voltage_; }
  double breakdown_voltage() const { return breakdown_; }

 private:
  double voltage_;
  double breakdown_;
};

// A numerical procedure failed to reach its target. The partial estimate
// and its error bound are kept so callers can report them.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double partial = 0.0, double error = 0.0)
      : std::runtime_error(what), partial_(partial), error_(error) {}
  double partial_estimate() const { return partial_; }
  double error_estimate() const { return error_; }

 private:
  double partial_;
  double error_;
};

// P(d) - load has no sign change in the bracket, or only unstable roots.
class NoSuspensionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// No reflectance dip deeper than the detection threshold.
class ResonanceNotDetectable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace casimir_fp
