// casimir.hpp
//
// Lifshitz energy per area and pressure between two layered bodies across a
// liquid gap, at finite temperature:
//
//   E/A = k_B T sum'_n int d^2k/(2 pi)^2  sum_{s,p} ln(1 - r1 r2 exp(-2 K_n d))
//
// with the n = 0 term weighted by 1/2. The k integral is done in u = 2 K_n d.
// Pressure is the analytic derivative -d(E/A)/dd; positive is repulsive.
#pragma once

#include <vector>

#include "casimir_fp/stack.hpp"

namespace casimir_fp {

struct QuadratureSpec {
  double rel_tol = 1e-6;
  // The u-range [u0, u0 + u_span] is split into `levels` geometric segments,
  // each cut into `segments_per_level` equal pieces, before adaptive
  // refinement. Node count = 15 * levels * segments_per_level.
  int levels = 9;
  int segments_per_level = 1;
  double u_span = 60.0;
  int max_intervals = 600;
  int max_matsubara = 2'000'000;
  // Terms kept are ceil(matsubara_factor * converged cutoff).
  double matsubara_factor = 1.0;

  int node_count() const { return 15 * levels * segments_per_level; }
  void validate() const;
  // Every cutoff doubled: nodes, u-span, Matsubara terms.
  QuadratureSpec doubled() const;
};

double matsubara_frequency(int n, double temperature);

struct MatsubaraGrid {
  double temperature;
  double spacing;  // xi_1, rad/s
  static constexpr double kZeroWeight = 0.5;

  explicit MatsubaraGrid(double temperature);
  double frequency(int n) const { return spacing * n; }
  double weight(int n) const { return n == 0 ? kZeroWeight : 1.0; }
};

// Lower bound on the cutoff: ceil(hbar c / (2 k_B T d sqrt(eps_liq))).
int matsubara_floor(double temperature, double d, double eps_liquid);

struct CasimirResult {
  double separation;
  double energy_per_area;   // J/m^2
  double pressure;          // Pa, positive = repulsive
  int matsubara_terms_used;
  // Error bound (quadrature + Matsubara tail) relative to the sum of |terms|.
  double estimated_relative_error;
  double energy_abs_error;
  double pressure_abs_error;
  double energy_scale;      // k_B T sum |E_n|
  double pressure_scale;    // k_B T sum |P_n|
};

// Immutable solver for one pair of stacks at fixed temperature. Region
// permittivities at the Matsubara frequencies are tabulated once at
// construction; evaluate() is const and safe to call concurrently.
class LifshitzSolver {
 public:
  LifshitzSolver(LayerStack upper, LayerStack lower, double temperature, QuadratureSpec quad = {},
                 double min_separation_hint = 10e-9);

  CasimirResult evaluate(double d) const;
  double pressure(double d) const { return evaluate(d).pressure; }
  double energy_per_area(double d) const { return evaluate(d).energy_per_area; }
  // Number of Matsubara terms the convergence test keeps at separation d.
  int matsubara_cutoff(double d) const { return evaluate(d).matsubara_terms_used; }

  const MatsubaraGrid& grid() const { return grid_; }
  const QuadratureSpec& quadrature() const { return quad_; }
  const LayerStack& upper() const { return upper_; }
  const LayerStack& lower() const { return lower_; }

 private:
  struct FrequencyRow {
    double xi;
    RegionArray<double> eps_upper;
    RegionArray<double> eps_lower;
  };
  struct Term {
    double energy, pressure, energy_err, pressure_err;
  };

  FrequencyRow make_row(int n) const;
  Term term(const FrequencyRow& row, double d) const;

  LayerStack upper_, lower_;
  Eigen::ArrayXd upper_thickness_, lower_thickness_;
  MatsubaraGrid grid_;
  QuadratureSpec quad_;
  std::vector<FrequencyRow> rows_;
};

double casimir_energy_per_area(double d, double temperature, const LayerStack& upper,
                               const LayerStack& lower, const QuadratureSpec& quad = {});
double casimir_pressure(double d, double temperature, const LayerStack& upper,
                        const LayerStack& lower, const QuadratureSpec& quad = {});
int matsubara_cutoff(double temperature, double d, double rel_tol, const LayerStack& upper,
                     const LayerStack& lower);

}  // namespace casimir_fp
