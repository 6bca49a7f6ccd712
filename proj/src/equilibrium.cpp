#include "casimir_fp/equilibrium.hpp"

#include <Eigen/Core>
#include <cmath>
#include <sstream>

#include "casimir_fp/errors.hpp"
#include "casimir_fp/parallel.hpp"

namespace casimir_fp {

void BodyForces::validate() const {
  if (!(gold_density > 0) || !(liquid_density > 0) || !(gravity > 0))
    throw ConfigError("densities and gravity must be positive");
  if (!(gold_density > liquid_density))
    throw ConfigError("plate density must exceed the liquid density");
  if (!(plate_thickness >= 0) || !std::isfinite(plate_thickness))
    throw ConfigError("plate thickness must be finite and non-negative");
}

double gb_pressure(const BodyForces& forces) {
  forces.validate();
  return (forces.gold_density - forces.liquid_density) * forces.gravity * forces.plate_thickness;
}

namespace {

// Illinois-modified regula falsi, falling back to bisection when the
// secant step stalls. f(a) and f(b) have opposite signs on entry.
double refine_root(const PressureCurve& f, double a, double b, double fa, double fb,
                   double x_tol, double f_tol, int max_iter) {
  int side = 0;
  double x = 0.5 * (a + b), fx = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    if (it % 3 == 2 || fa == fb) {
      x = 0.5 * (a + b);
    } else {
      x = (a * fb - b * fa) / (fb - fa);
      if (!(x > a && x < b)) x = 0.5 * (a + b);
    }
    fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (fa > 0)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if ((b - a) < x_tol && std::abs(fx) <= f_tol) return x;
    // Below this width the curve is flat at its noise floor.
    if ((b - a) < 1e-6 * x_tol) break;
  }
  return x;
}

double central_slope(const PressureCurve& f, double d, double h) {
  return (f(d + h) - f(d - h)) / (2.0 * h);
}

}  // namespace

EquilibriumPoint find_equilibrium(const PressureCurve& pressure, double load,
                                  std::pair<double, double> bracket,
                                  const EquilibriumOptions& options) {
  const auto [lo, hi] = bracket;
  if (!(lo > 0) || !(hi > lo)) throw ConfigError("equilibrium bracket must satisfy 0 < lo < hi");
  if (!(load > 0)) throw ConfigError("load pressure must be positive");
  if (options.scan_points < 2) throw ConfigError("scan needs at least two points");

  const Eigen::ArrayXd grid =
      Eigen::ArrayXd::LinSpaced(options.scan_points, std::log(lo), std::log(hi)).exp();
  Eigen::ArrayXd p(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) p(i) = pressure(grid(i));

  const double f_tol = options.residual_tolerance * load;
  auto shifted = [&](double d) { return pressure(d) - load; };

  EquilibriumPoint out{};
  out.load = load;
  std::optional<std::size_t> chosen;
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
    const double g0 = p(i) - load, g1 = p(i + 1) - load;
    if ((g0 > 0) == (g1 > 0) && g1 != 0.0) continue;
    double d = g1 == 0.0 ? grid(i + 1)
                         : refine_root(shifted, grid(i), grid(i + 1), g0, g1, options.x_tolerance,
                                       f_tol, options.max_iterations);
    const double h = std::min(options.slope_step, 0.25 * (d - lo));
    const double slope = central_slope(pressure, d, h);
    out.roots.push_back({d, slope, slope < 0});
    if (!chosen && slope < 0) chosen = out.roots.size() - 1;
  }
  if (out.roots.empty()) {
    std::ostringstream msg;
    msg << "no stable suspension: Casimir pressure minus load (" << load
        << " Pa) has no sign change in [" << lo * 1e9 << ", " << hi * 1e9 << "] nm";
    throw NoSuspensionError(msg.str(), p.maxCoeff() - load);
  }
  const RootInfo& root = out.roots[chosen.value_or(0)];
  out.d_e = root.d;
  out.slope = root.slope;
  out.stable = root.stable;
  out.residual_pressure = pressure(root.d) - load;

  // Casimir equilibrium: first repulsive-to-attractive crossing above d_e.
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
    if (grid(i + 1) < out.d_e) continue;
    const double a = std::max(grid(i), out.d_e);
    const double pa = a == grid(i) ? p(i) : pressure(a);
    const double pb = p(i + 1);
    if (pa > 0 && pb <= 0) {
      out.casimir_zero_crossing =
          pb == 0.0 ? grid(i + 1)
                    : refine_root(pressure, a, grid(i + 1), pa, pb, options.x_tolerance,
                                  f_tol, options.max_iterations);
      break;
    }
  }
  return out;
}

BodyForces forces_for(const CavityGeometry& geometry, const BodyForces& base) {
  BodyForces f = base;
  f.plate_thickness = geometry.plate_thickness;
  return f;
}

EquilibriumPoint solve_equilibrium(const CavityGeometry& geometry, const MaterialLibrary& lib,
                                   const EquilibriumSettings& settings) {
  geometry.validate();
  const double load = gb_pressure(forces_for(geometry, settings.forces));
  const GateState gate = resolve_gate(geometry, lib);
  const LifshitzSolver solver(build_upper_stack(geometry, lib),
                              build_lower_stack(geometry, gate, lib), geometry.lifshitz_temperature(),
                              settings.quad, settings.bracket.first);
  return find_equilibrium([&](double d) { return solver.pressure(d); }, load, settings.bracket,
                          settings.solver);
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kVoltage: return "voltage";
    case SweepAxis::kTemperature: return "temperature";
    case SweepAxis::kSilicaThickness: return "silica_thickness";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "voltage") return SweepAxis::kVoltage;
  if (name == "temperature") return SweepAxis::kTemperature;
  if (name == "silica_thickness" || name == "silica") return SweepAxis::kSilicaThickness;
  throw ConfigError("unknown sweep axis '" + name + "' (voltage, temperature, silica_thickness)");
}

CavityGeometry with_axis(CavityGeometry base, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kVoltage: base.voltage = value; break;
    case SweepAxis::kTemperature: base.temperature = value; break;
    case SweepAxis::kSilicaThickness: base.silica_thickness = value; break;
  }
  return base;
}

TrendDiagnostics trend_of(const std::vector<double>& x, const std::vector<double>& y) {
  TrendDiagnostics t;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return t;
  bool up = true, down = true;
  for (std::size_t i = 1; i < n; ++i) {
    up = up && y[i] > y[i - 1];
    down = down && y[i] < y[i - 1];
  }
  t.monotone = up || down;
  t.direction = up ? 1 : down ? -1 : 0;
  t.total_change = y[n - 1] - y[0];

  const Eigen::Map<const Eigen::ArrayXd> X(x.data(), n), Y(y.data(), n);
  const double xm = X.mean(), ym = Y.mean();
  const double sxx = (X - xm).square().sum();
  const double slope = sxx > 0 ? ((X - xm) * (Y - ym)).sum() / sxx : 0.0;
  const double dev = (Y - (ym + slope * (X - xm))).abs().maxCoeff();
  t.linearity_deviation = t.total_change != 0 ? dev / std::abs(t.total_change) : 0.0;
  return t;
}

EquilibriumSweep sweep_equilibrium(SweepAxis axis, const std::vector<double>& grid,
                                   const CavityGeometry& base, const MaterialLibrary& lib,
                                   const EquilibriumSettings& settings, int jobs) {
  EquilibriumSweep sweep{axis, std::vector<SweepNode>(grid.size()), {}};
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    SweepNode& node = sweep.nodes[i];
    node.axis_value = grid[i];
    try {
      node.point = solve_equilibrium(with_axis(base, axis, grid[i]), lib, settings);
    } catch (const std::exception& e) {
      node.error = e.what();
    }
  });
  std::vector<double> x, y;
  for (const SweepNode& node : sweep.nodes) {
    if (node.point && node.point->stable) {
      x.push_back(node.axis_value);
      y.push_back(node.point->d_e);
    } else {
      ++sweep.trend.failed_nodes;
    }
  }
  const int failed = sweep.trend.failed_nodes;
  sweep.trend = trend_of(x, y);
  sweep.trend.failed_nodes = failed;
  return sweep;
}

}  // namespace casimir_fp
