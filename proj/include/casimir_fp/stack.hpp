// stack.hpp
//
// Stratified media and their s/p reflection coefficients.
//
// The recursion works on the decay constant K_j of every region:
//   imaginary frequency: K_j = sqrt(k^2 + eps_j(i xi) xi^2 / c^2)      (real)
//   real frequency:      K_j = -i sqrt(eps_j(w) w^2 / c^2 - k^2)       (complex)
// so the same templated code evaluates both. Phase factors exp(-2 K_j L_j)
// have modulus <= 1 in both cases; thick layers saturate to the
// single-interface result instead of overflowing.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "casimir_fp/materials.hpp"

namespace casimir_fp {

enum class Polarization { TE, TM };

template <typename Scalar>
using RegionArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

// Fresnel coefficients. The convention is
//   r_TE = (K_a - K_b) / (K_a + K_b)
//   r_TM = (eps_b K_a - eps_a K_b) / (eps_b K_a + eps_a K_b)
// with t = 1 + r (TE: electric field, TM: magnetic field amplitudes).
// An infinite (real) permittivity marks the static conductor limit.
template <typename Scalar>
Scalar fresnel_r(Polarization pol, const Scalar& eps_a, const Scalar& K_a, const Scalar& eps_b,
                 const Scalar& K_b) {
  if (pol == Polarization::TE) {
    if (K_a == K_b) return Scalar(0);
    return (K_a - K_b) / (K_a + K_b);
  }
  if constexpr (std::is_floating_point_v<Scalar>) {
    const bool inf_a = std::isinf(eps_a), inf_b = std::isinf(eps_b);
    if (inf_a && inf_b) return Scalar(0);
    if (inf_b) return Scalar(1);
    if (inf_a) return Scalar(-1);
  }
  if (K_a == K_b) return (eps_b - eps_a) / (eps_b + eps_a);
  return (eps_b * K_a - eps_a * K_b) / (eps_b * K_a + eps_a * K_b);
}

template <typename Scalar>
struct StratifiedResponse {
  Scalar r;  // reflection seen from region 0
  Scalar t;  // transmission into the last region
};

// eps and K have one entry per region (incident, layers..., exit);
// thickness has one entry per interior layer.
template <typename Scalar>
StratifiedResponse<Scalar> stratified_response(const RegionArray<Scalar>& eps,
                                               const RegionArray<Scalar>& K,
                                               const Eigen::ArrayXd& thickness, Polarization pol) {
  const Eigen::Index n = eps.size();
  const Eigen::Index last = n - 1;
  Scalar r = fresnel_r(pol, eps(last - 1), K(last - 1), eps(last), K(last));
  Scalar t = Scalar(1) + r;
  for (Eigen::Index j = last - 1; j >= 1; --j) {
    const Scalar p = std::exp(-K(j) * thickness(j - 1));
    const Scalar p2 = p * p;
    const Scalar r_int = fresnel_r(pol, eps(j - 1), K(j - 1), eps(j), K(j));
    const Scalar den = Scalar(1) + r_int * r * p2;
    t = (Scalar(1) + r_int) * p * t / den;
    r = (r_int + r * p2) / den;
  }
  return {r, t};
}

// ---------------------------------------------------------------------------

struct Layer {
  MaterialRef material;
  double thickness;  // m
};

struct LayerStack {
  MaterialRef incident;
  std::vector<Layer> layers;
  MaterialRef exit;

  std::size_t region_count() const { return layers.size() + 2; }
  Eigen::ArrayXd thicknesses() const;
  // All regions in propagation order, half-spaces included.
  std::vector<MaterialRef> regions() const;
  // Throws ConfigError for null materials or non-positive thicknesses.
  void validate() const;
};

// Reflection at imaginary frequency xi with in-plane wavevector k_par.
double reflection_imag_freq(const LayerStack& stack, double xi, double k_par, Polarization pol);

// Same, with the region permittivities already evaluated at xi.
double reflection_imag_freq(const RegionArray<double>& eps, const Eigen::ArrayXd& thickness,
                            double xi, double k_par, Polarization pol);

// Normal-incidence complex reflection at real angular frequency omega.
std::complex<double> reflection_real_freq(const LayerStack& stack, double omega,
                                          Polarization pol = Polarization::TE);

struct RealFrequencyResponse {
  std::complex<double> r;
  std::complex<double> t;
  double reflectance;
  double transmittance;
};

RealFrequencyResponse response_real_freq(const LayerStack& stack, double omega,
                                         Polarization pol = Polarization::TE);
RealFrequencyResponse response_real_freq(const RegionArray<std::complex<double>>& eps,
                                         const Eigen::ArrayXd& thickness, double omega,
                                         Polarization pol = Polarization::TE);

// ---------------------------------------------------------------------------
// Cavity geometry

enum class AccumulationPlacement { kAdjacentToSilica, kAdjacentToTeflon };

struct CavityGeometry {
  double plate_thickness = 40e-9;
  double gap = 85e-9;
  double teflon_thickness = 10e-9;
  double ito_thickness = 5e-9;
  double silica_thickness = 150e-9;
  double voltage = 0.0;
  double temperature = 300.0;
  AccumulationPlacement placement = AccumulationPlacement::kAdjacentToSilica;
  // Diagnostics: replace `temperature` in only one of its two roles, to
  // separate the Matsubara-spacing and accumulation-layer thermal effects.
  std::optional<double> gate_temperature;
  std::optional<double> matsubara_temperature;

  double lifshitz_temperature() const { return matsubara_temperature.value_or(temperature); }
  void validate() const;
};

// glycerol | Teflon | ITO background | ITO accumulation | silica | gold.
// At zero bias the two ITO sublayers are merged into one.
LayerStack build_lower_stack(const CavityGeometry& geometry, const GateState& gate,
                             const MaterialLibrary& lib);
LayerStack build_lower_stack(const CavityGeometry& geometry, const MaterialLibrary& lib);
// glycerol | gold plate | glycerol, seen from the gap.
LayerStack build_upper_stack(const CavityGeometry& geometry, const MaterialLibrary& lib);

GateState resolve_gate(const CavityGeometry& geometry, const MaterialLibrary& lib);

// Layer names/thicknesses for config files and debugging.
nlohmann::json stack_to_json(const LayerStack& stack);
LayerStack stack_from_json(const nlohmann::json& doc, const MaterialLibrary& lib);

}  // namespace casimir_fp
