// oracles.hpp
//
// Closed-form reference results, written independently of the library.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

inline constexpr double hbar = 1.054571817e-34;
inline constexpr double c = 299792458.0;
inline constexpr double kB = 1.380649e-23;
inline constexpr double e = 1.602176634e-19;
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double pi = std::numbers::pi;
inline constexpr double eV = e / hbar;  // rad/s

// eps(i xi) of a pure Drude metal.
inline double drude_imag_axis(double wp, double gamma, double xi) {
  return 1.0 + wp * wp / (xi * (xi + gamma));
}

inline double drude_absorption(double wp, double gamma, double x) {
  return wp * wp * gamma / (x * (x * x + gamma * gamma));
}

// Perfect mirrors at zero temperature.
inline double ideal_energy(double d) { return -pi * pi * hbar * c / (720.0 * d * d * d); }
inline double ideal_pressure(double d) { return -pi * pi * hbar * c / (240.0 * d * d * d * d); }

inline double matsubara(int n, double T) { return 2.0 * pi * kB * T * n / hbar; }

// Debye length style accumulation thickness and the charge it holds.
inline double accumulation_thickness(double n_b, double T, double eps_r) {
  return pi / std::sqrt(2.0) * std::sqrt(kB * T * eps0 * eps_r / (n_b * e * e));
}
inline double accumulation_density(double n_b, double V, double L_s, double L_a) {
  return n_b + eps0 * 3.9 * V / (e * L_s * L_a);
}

// Same-medium slab of thickness L between identical half-spaces, at
// imaginary frequency (all quantities real).
inline double slab(double r12, double K2, double L) {
  const double p = std::exp(-2.0 * K2 * L);
  return r12 * (1.0 - p) / (1.0 - r12 * r12 * p);
}

// Airy reflectance of a lossless film n2 (thickness L) between n1 and n3.
inline double airy_reflectance(double n1, double n2, double n3, double L, double lambda) {
  const double r12 = (n1 - n2) / (n1 + n2), r23 = (n2 - n3) / (n2 + n3);
  const double cos2d = std::cos(4.0 * pi * n2 * L / lambda);
  return (r12 * r12 + r23 * r23 + 2 * r12 * r23 * cos2d) /
         (1 + r12 * r12 * r23 * r23 + 2 * r12 * r23 * cos2d);
}

}  // namespace oracle
