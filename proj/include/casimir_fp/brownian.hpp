// brownian.hpp
//
// Boltzmann statistics of the plate height in the Casimir trap:
//   U(d) = A E(d) + A p_load d,   rho(d) ~ exp(-U / k_B T).
#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "casimir_fp/equilibrium.hpp"

namespace casimir_fp {

struct PotentialProfile {
  Eigen::ArrayXd d;  // m, ascending
  Eigen::ArrayXd U;  // J
  double area = 0.0;
  double temperature = 0.0;
  // Force-balance root, when the profile was built from a geometry.
  std::optional<double> equilibrium;
};

struct ProfileOptions {
  double d_min = 5e-9;
  double d_max = 500e-9;
  int points = 2000;
  // Exact Lifshitz evaluations are placed this far apart inside the well
  // and interpolated by cubic Hermite (U and dU/dd = A (load - P)).
  double anchor_spacing = 0.5e-9;
  // The well is resolved out to U - U_min = window_kt k_B T on each side.
  double window_kt = 40.0;
  int well_points = 801;
  void validate() const;
};

struct BrownianSettings {
  EquilibriumSettings equilibrium;
  ProfileOptions profile;
};

PotentialProfile potential_profile(const CavityGeometry& geometry, const MaterialLibrary& lib,
                                   double area, const BrownianSettings& settings = {});

struct PositionDistribution {
  Eigen::ArrayXd d;    // m
  Eigen::ArrayXd rho;  // 1/m
  double normalization = 0.0;  // trapezoid integral of rho
  double mean = 0.0;
  double equilibrium = 0.0;    // force-balance d_e, or the density peak
  double offset = 0.0;         // mean - equilibrium
  double peak_density = 0.0;   // 1/m
  double peak_position = 0.0;
  double boundary_ratio = 0.0;  // max(rho at ends) / peak
  double variance = 0.0;
};

struct DistributionOptions {
  double boundary_tolerance = 1e-8;
};

// Throws NumericalError when the density at either end of the grid is not
// negligible relative to the peak.
PositionDistribution position_distribution(const PotentialProfile& profile,
                                           const DistributionOptions& options = {});

struct Scenario {
  double voltage;
  double temperature;
  double silica_thickness;
  std::string label;
};

struct ScenarioSummary {
  Scenario scenario;
  std::optional<PositionDistribution> distribution;
  std::string error;
};

struct Comparison {
  std::vector<ScenarioSummary> summaries;
  // overlap(i, j) = integral of min(rho_i, rho_j); NaN where either failed.
  Eigen::MatrixXd overlap;
};

double overlap_integral(const PositionDistribution& a, const PositionDistribution& b);

Comparison compare_distributions(const std::vector<Scenario>& scenarios,
                                 const CavityGeometry& base, const MaterialLibrary& lib,
                                 double area, const BrownianSettings& settings = {},
                                 int jobs = 1);

}  // namespace casimir_fp
