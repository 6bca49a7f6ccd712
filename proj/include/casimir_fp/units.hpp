// units.hpp
//
// Physical quantities as text, e.g. "150nm", "0.15um", "300K", "450V",
// "0.5Vb", "20x20um". A unit is always required.
#pragma once

#include <string>
#include <string_view>

namespace casimir_fp {

enum class Dimension { kLength, kVoltage, kTemperature, kArea, kFrequency, kDensity, kAcceleration };

// Returns the value in SI units (m, V, K, m^2, rad/s, kg/m^3, m/s^2). Frequencies accept
// rad/s, Hz, THz, eV, and wavelengths (nm, um), converted to angular
// frequency. Throws ConfigError on a missing or unknown unit.
double parse_quantity(std::string_view text, Dimension dim);

// A gate voltage either in volts or as a multiple of the breakdown voltage.
struct VoltageSpec {
  double value = 0.0;
  bool relative_to_breakdown = false;
  double resolve(double breakdown) const {
    return relative_to_breakdown ? value * breakdown : value;
  }
  std::string str() const;
};

VoltageSpec parse_voltage(std::string_view text);

}  // namespace casimir_fp
