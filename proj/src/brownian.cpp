#include "casimir_fp/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"
#include "casimir_fp/parallel.hpp"

namespace casimir_fp {

namespace c = constants;

void ProfileOptions::validate() const {
  if (!(d_min > 0) || !(d_max > d_min)) throw ConfigError("profile range must satisfy 0 < min < max");
  if (points < 3 || well_points < 3) throw ConfigError("profile needs at least three points");
  if (!(anchor_spacing > 0)) throw ConfigError("anchor spacing must be positive");
  if (!(window_kt > 0)) throw ConfigError("well window must be positive");
}

namespace {

struct Anchor {
  double d, U, dU;
};

class HermiteCurve {
 public:
  explicit HermiteCurve(std::vector<Anchor> anchors) : a_(std::move(anchors)) {
    std::sort(a_.begin(), a_.end(), [](const Anchor& p, const Anchor& q) { return p.d < q.d; });
  }

  double operator()(double d) const {
    auto it = std::lower_bound(a_.begin(), a_.end(), d,
                               [](const Anchor& p, double x) { return p.d < x; });
    if (it == a_.begin()) return a_.front().U + a_.front().dU * (d - a_.front().d);
    if (it == a_.end()) return a_.back().U + a_.back().dU * (d - a_.back().d);
    const Anchor& p = *(it - 1);
    const Anchor& q = *it;
    const double h = q.d - p.d, t = (d - p.d) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p.U + (t3 - 2 * t2 + t) * h * p.dU + (-2 * t3 + 3 * t2) * q.U +
           (t3 - t2) * h * q.dU;
  }

 private:
  std::vector<Anchor> a_;
};

// Trapezoid weights on an arbitrary ascending grid.
Eigen::ArrayXd trapezoid_weights(const Eigen::ArrayXd& x) {
  const Eigen::Index n = x.size();
  Eigen::ArrayXd w(n);
  w(0) = 0.5 * (x(1) - x(0));
  w(n - 1) = 0.5 * (x(n - 1) - x(n - 2));
  for (Eigen::Index i = 1; i + 1 < n; ++i) w(i) = 0.5 * (x(i + 1) - x(i - 1));
  return w;
}

// Sum f(i) folded from both ends inward, so mirror-image terms meet first.
template <typename F>
double folded_sum(Eigen::Index n, F&& f) {
  double s = 0.0;
  Eigen::Index i = 0, j = n - 1;
  for (; i < j; ++i, --j) s += f(i) + f(j);
  if (i == j) s += f(i);
  return s;
}

}  // namespace

PotentialProfile potential_profile(const CavityGeometry& geometry, const MaterialLibrary& lib,
                                   double area, const BrownianSettings& settings) {
  const ProfileOptions& opt = settings.profile;
  opt.validate();
  geometry.validate();
  if (!(area > 0) || !std::isfinite(area)) throw ConfigError("plate area must be positive");

  const double kT = c::k_boltzmann * geometry.temperature;
  const double load = gb_pressure(forces_for(geometry, settings.equilibrium.forces));
  const GateState gate = resolve_gate(geometry, lib);
  const LifshitzSolver solver(build_upper_stack(geometry, lib),
                              build_lower_stack(geometry, gate, lib), geometry.lifshitz_temperature(),
                              settings.equilibrium.quad, opt.d_min);

  const std::pair<double, double> bracket{std::max(opt.d_min, settings.equilibrium.bracket.first),
                                          std::min(opt.d_max, settings.equilibrium.bracket.second)};
  const EquilibriumPoint eq = find_equilibrium([&](double d) { return solver.pressure(d); }, load,
                                               bracket, settings.equilibrium.solver);
  if (!eq.stable)
    throw NoSuspensionError("no stable suspension: only unstable force-balance roots", eq.d_e);

  auto exact = [&](double d) {
    const CasimirResult r = solver.evaluate(d);
    return Anchor{d, area * (r.energy_per_area + load * d), area * (load - r.pressure)};
  };

  // Anchors across the well, then a sparse geometric tail to each end.
  std::vector<Anchor> anchors{exact(eq.d_e)};
  const double U0 = anchors.front().U;
  const double sigma = std::sqrt(kT / (area * std::abs(eq.slope)));
  const double h = std::min(opt.anchor_spacing, sigma / 3.0);
  const double limit = opt.window_kt * kT;
  constexpr int kMaxAnchors = 20000;
  double lo = eq.d_e, hi = eq.d_e;
  for (int k = 0; k < kMaxAnchors && lo > opt.d_min; ++k) {
    lo = std::max(opt.d_min, lo - h);
    anchors.push_back(exact(lo));
    if (anchors.back().U - U0 > limit) break;
  }
  for (int k = 0; k < kMaxAnchors && hi < opt.d_max; ++k) {
    hi = std::min(opt.d_max, hi + h);
    anchors.push_back(exact(hi));
    if (anchors.back().U - U0 > limit) break;
  }
  constexpr double kTailRatio = 1.05;
  for (double d = lo / kTailRatio; d > opt.d_min; d /= kTailRatio) anchors.push_back(exact(d));
  if (lo > opt.d_min) anchors.push_back(exact(opt.d_min));
  for (double d = hi * kTailRatio; d < opt.d_max; d *= kTailRatio) anchors.push_back(exact(d));
  if (hi < opt.d_max) anchors.push_back(exact(opt.d_max));
  const HermiteCurve curve(std::move(anchors));

  // Coarse user grid outside the well, dense grid inside it.
  const Eigen::ArrayXd coarse = Eigen::ArrayXd::LinSpaced(opt.points, opt.d_min, opt.d_max);
  const Eigen::ArrayXd well = Eigen::ArrayXd::LinSpaced(opt.well_points, lo, hi);
  std::vector<double> d;
  d.reserve(coarse.size() + well.size());
  for (double x : coarse)
    if (x < lo) d.push_back(x);
  d.insert(d.end(), well.begin(), well.end());
  for (double x : coarse)
    if (x > hi) d.push_back(x);

  PotentialProfile out;
  out.d = Eigen::Map<const Eigen::ArrayXd>(d.data(), static_cast<Eigen::Index>(d.size()));
  out.U = out.d.unaryExpr([&](double x) { return curve(x); });
  out.area = area;
  out.temperature = geometry.temperature;
  out.equilibrium = eq.d_e;
  return out;
}

PositionDistribution position_distribution(const PotentialProfile& profile,
                                           const DistributionOptions& options) {
  const Eigen::ArrayXd& d = profile.d;
  const Eigen::Index n = d.size();
  if (n < 3 || profile.U.size() != n) throw ConfigError("profile needs matching d and U arrays");
  if (!(profile.temperature > 0)) throw ConfigError("profile temperature must be positive");
  if (!profile.U.allFinite()) throw NumericalError("potential profile is not finite");

  const double kT = c::k_boltzmann * profile.temperature;
  Eigen::Index imin = 0;
  const double Umin = profile.U.minCoeff(&imin);
  const Eigen::ArrayXd logw = -(profile.U - Umin) / kT;
  const Eigen::ArrayXd w = logw.exp();
  const Eigen::ArrayXd weights = trapezoid_weights(d);

  if (imin == 0 || imin == n - 1)
    throw NumericalError("density peak sits on the grid boundary", d(imin));
  // Peak refined on log(w), exact for a Gaussian.
  const double f0 = logw(imin - 1), f1 = logw(imin), f2 = logw(imin + 1);
  const double x0 = d(imin - 1), x1 = d(imin), x2 = d(imin + 1);
  const double a = (x1 - x0) * (f1 - f2), b = (x1 - x2) * (f1 - f0);
  double xp = x1, fp = f1;
  if (a - b != 0.0) {
    xp = x1 - 0.5 * ((x1 - x0) * a - (x1 - x2) * b) / (a - b);
    fp = f0 * (xp - x1) * (xp - x2) / ((x0 - x1) * (x0 - x2)) +
         f1 * (xp - x0) * (xp - x2) / ((x1 - x0) * (x1 - x2)) +
         f2 * (xp - x0) * (xp - x1) / ((x2 - x0) * (x2 - x1));
  }

  PositionDistribution out;
  const double Z = folded_sum(n, [&](Eigen::Index i) { return weights(i) * w(i); });
  out.d = d;
  out.rho = w / Z;
  out.normalization = folded_sum(n, [&](Eigen::Index i) { return weights(i) * out.rho(i); });
  const double centre = 0.5 * (d(0) + d(n - 1));
  out.mean = centre + folded_sum(n, [&](Eigen::Index i) {
               return weights(i) * out.rho(i) * (d(i) - centre);
             });
  out.variance = folded_sum(n, [&](Eigen::Index i) {
    return weights(i) * out.rho(i) * (d(i) - out.mean) * (d(i) - out.mean);
  });
  out.peak_position = xp;
  out.peak_density = std::exp(fp) / Z;
  out.equilibrium = profile.equilibrium.value_or(xp);
  out.offset = out.mean - out.equilibrium;
  out.boundary_ratio = std::max(w(0), w(n - 1)) / std::exp(fp);
  if (!(out.boundary_ratio <= options.boundary_tolerance)) {
    std::ostringstream msg;
    msg << "inadequate grid coverage: density at the grid boundary is " << out.boundary_ratio
        << " of the peak (limit " << options.boundary_tolerance << ")";
    throw NumericalError(msg.str(), out.mean, out.boundary_ratio);
  }
  return out;
}

double overlap_integral(const PositionDistribution& a, const PositionDistribution& b) {
  std::vector<double> x(a.d.begin(), a.d.end());
  x.insert(x.end(), b.d.begin(), b.d.end());
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  auto at = [](const PositionDistribution& p, double v) {
    if (v < p.d(0) || v > p.d(p.d.size() - 1)) return 0.0;
    auto it = std::lower_bound(p.d.begin(), p.d.end(), v);
    const Eigen::Index j = it - p.d.begin();
    if (j == 0) return p.rho(0);
    const double t = (v - p.d(j - 1)) / (p.d(j) - p.d(j - 1));
    return p.rho(j - 1) + t * (p.rho(j) - p.rho(j - 1));
  };
  const Eigen::Map<const Eigen::ArrayXd> X(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::ArrayXd m =
      X.unaryExpr([&](double v) { return std::min(at(a, v), at(b, v)); });
  return (trapezoid_weights(X) * m).sum();
}

Comparison compare_distributions(const std::vector<Scenario>& scenarios,
                                 const CavityGeometry& base, const MaterialLibrary& lib,
                                 double area, const BrownianSettings& settings, int jobs) {
  Comparison out;
  out.summaries.resize(scenarios.size());
  parallel_for(scenarios.size(), jobs, [&](std::size_t i) {
    ScenarioSummary& s = out.summaries[i];
    s.scenario = scenarios[i];
    try {
      CavityGeometry g = base;
      g.voltage = scenarios[i].voltage;
      g.temperature = scenarios[i].temperature;
      g.silica_thickness = scenarios[i].silica_thickness;
      s.distribution = position_distribution(potential_profile(g, lib, area, settings));
    } catch (const std::exception& e) {
      s.error = e.what();
    }
  });
  const Eigen::Index n = static_cast<Eigen::Index>(scenarios.size());
  out.overlap = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& p = out.summaries[i].distribution;
      const auto& q = out.summaries[j].distribution;
      if (p && q) out.overlap(i, j) = out.overlap(j, i) = overlap_integral(*p, *q);
    }
  return out;
}

}  // namespace casimir_fp
