// constants.hpp
#pragma once

#include <numbers>

namespace casimir_fp::constants {

// CODATA 2018 exact / recommended values, SI units.
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double k_boltzmann = 1.380649e-23;      // J / K
inline constexpr double speed_of_light = 299792458.0;    // m / s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F / m
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double standard_gravity = 9.8;          // m / s^2
inline constexpr double pi = std::numbers::pi;

// One electron-volt expressed as an angular frequency (rad/s).
inline constexpr double ev_to_rad_per_s = elementary_charge / hbar;

inline constexpr double nm = 1e-9;

}  // namespace casimir_fp::constants
