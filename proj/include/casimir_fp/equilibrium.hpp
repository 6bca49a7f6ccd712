// equilibrium.hpp
//
// Force balance between Casimir pressure and the net weight of the plate.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "casimir_fp/casimir.hpp"

namespace casimir_fp {

struct BodyForces {
  double gold_density = 19300.0;   // kg/m^3
  double liquid_density = 1260.0;  // kg/m^3, glycerol
  double gravity = 9.8;            // m/s^2
  double plate_thickness = 40e-9;  // m
  void validate() const;
};

// Net downward weight per area, (rho_gold - rho_liquid) g t.
double gb_pressure(const BodyForces& forces);

struct RootInfo {
  double d;
  double slope;  // dP/dd, Pa/m
  bool stable;
};

struct EquilibriumPoint {
  double d_e;
  bool stable;   // dP/dd < 0 at d_e
  double slope;  // Pa/m
  std::optional<double> casimir_zero_crossing;
  double residual_pressure;  // P(d_e) - load
  double load;
  // Every root of P - load found in the bracket, d_e included.
  std::vector<RootInfo> roots;
};

struct EquilibriumOptions {
  int scan_points = 64;         // log-spaced scan before refinement
  double x_tolerance = 0.01e-9;
  double residual_tolerance = 1e-5;  // relative to load
  double slope_step = 0.1e-9;
  int max_iterations = 200;
};

using PressureCurve = std::function<double(double)>;

// Roots of P(d) - load inside [bracket.first, bracket.second]. The stable
// root with the largest basin (first downward crossing) is returned; if only
// unstable roots exist the first one is returned with stable = false.
// Throws NoSuspensionError when P - load never changes sign.
EquilibriumPoint find_equilibrium(const PressureCurve& pressure, double load,
                                  std::pair<double, double> bracket,
                                  const EquilibriumOptions& options = {});

struct EquilibriumSettings {
  QuadratureSpec quad;
  EquilibriumOptions solver;
  BodyForces forces;  // plate_thickness is taken from the geometry
  std::pair<double, double> bracket{10e-9, 500e-9};
};

BodyForces forces_for(const CavityGeometry& geometry, const BodyForces& base);

EquilibriumPoint solve_equilibrium(const CavityGeometry& geometry, const MaterialLibrary& lib,
                                   const EquilibriumSettings& settings = {});

enum class SweepAxis { kVoltage, kTemperature, kSilicaThickness };

const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);
// Copy of base with the axis coordinate set to value (SI units).
CavityGeometry with_axis(CavityGeometry base, SweepAxis axis, double value);

struct SweepNode {
  double axis_value;
  std::optional<EquilibriumPoint> point;
  std::string error;  // empty on success
};

struct TrendDiagnostics {
  int direction = 0;  // +1 increasing, -1 decreasing, 0 mixed or too few points
  bool monotone = false;
  double total_change = 0.0;
  // Largest deviation from the least-squares line, relative to |total_change|.
  double linearity_deviation = 0.0;
  int failed_nodes = 0;
};

struct EquilibriumSweep {
  SweepAxis axis;
  std::vector<SweepNode> nodes;
  TrendDiagnostics trend;
};

TrendDiagnostics trend_of(const std::vector<double>& x, const std::vector<double>& y);

// One solve per grid node, run concurrently up to `jobs` at a time. Node
// failures are recorded in the node and the sweep continues.
EquilibriumSweep sweep_equilibrium(SweepAxis axis, const std::vector<double>& grid,
                                   const CavityGeometry& base, const MaterialLibrary& lib,
                                   const EquilibriumSettings& settings = {}, int jobs = 1);

}  // namespace casimir_fp
