// casimir.cpp
#include "casimir_fp/casimir.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"
#include "casimir_fp/quadrature.hpp"

namespace casimir_fp {

namespace c = constants;

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0)) throw ConfigError("quadrature tolerance must be > 0");
  if (levels < 1 || segments_per_level < 1 || node_count() < 16)
    throw ConfigError("quadrature needs at least 16 nodes");
  if (!(u_span > 0) || max_matsubara < 1 || !(matsubara_factor >= 1.0))
    throw ConfigError("invalid quadrature cutoffs");
}

QuadratureSpec QuadratureSpec::doubled() const {
  QuadratureSpec q = *this;
  q.segments_per_level *= 2;
  q.u_span *= 2.0;
  q.matsubara_factor *= 2.0;
  q.max_intervals *= 2;
  return q;
}

double matsubara_frequency(int n, double temperature) {
  if (n < 0 || !(temperature > 0)) throw ConfigError("Matsubara frequency needs n >= 0 and T > 0");
  return 2.0 * c::pi * c::k_boltzmann * temperature * n / c::hbar;
}

MatsubaraGrid::MatsubaraGrid(double t) : temperature(t), spacing(matsubara_frequency(1, t)) {}

int matsubara_floor(double temperature, double d, double eps_liquid) {
  if (!(temperature > 0) || !(d > 0) || !(eps_liquid > 0))
    throw ConfigError("Matsubara floor needs positive T, d, eps");
  return static_cast<int>(std::ceil(c::hbar * c::speed_of_light /
                                    (2.0 * c::k_boltzmann * temperature * d * std::sqrt(eps_liquid))));
}

namespace {

RegionArray<double> region_eps(const LayerStack& s, double xi) {
  const auto regions = s.regions();
  RegionArray<double> eps(static_cast<Eigen::Index>(regions.size()));
  for (std::size_t j = 0; j < regions.size(); ++j)
    eps(static_cast<Eigen::Index>(j)) = regions[j]->eps_imag(xi);
  return eps;
}

}  // namespace

LifshitzSolver::LifshitzSolver(LayerStack upper, LayerStack lower, double temperature,
                               QuadratureSpec quad, double min_separation_hint)
    : upper_(std::move(upper)),
      lower_(std::move(lower)),
      grid_(temperature),
      quad_(quad) {
  if (!(temperature > 0)) throw ConfigError("temperature must be > 0");
  upper_.validate();
  lower_.validate();
  quad_.validate();
  if (upper_.incident != lower_.incident && upper_.incident->name() != lower_.incident->name())
    throw ConfigError("upper and lower stacks must share the gap medium");
  upper_thickness_ = upper_.thicknesses();
  lower_thickness_ = lower_.thicknesses();

  // Tabulate enough frequencies for separations down to the hint.
  const double decades = std::log(1.0 / quad_.rel_tol) + 12.0;
  const double xi_max =
      c::speed_of_light * decades / (2.0 * std::max(min_separation_hint, 1e-10));
  const double wanted = std::ceil(quad_.matsubara_factor * xi_max / grid_.spacing) + 1;
  const int cached = static_cast<int>(std::min(wanted, 8192.0));
  rows_.reserve(static_cast<std::size_t>(cached));
  for (int n = 0; n < cached; ++n) rows_.push_back(make_row(n));
}

LifshitzSolver::FrequencyRow LifshitzSolver::make_row(int n) const {
  const double xi = grid_.frequency(n);
  return {xi, region_eps(upper_, xi), region_eps(lower_, xi)};
}

LifshitzSolver::Term LifshitzSolver::term(const FrequencyRow& row, double d) const {
  const double xi = row.xi;
  const double eps_gap = row.eps_upper(0);
  const double xi_c2 = (xi / c::speed_of_light) * (xi / c::speed_of_light);
  const double u0 = xi == 0.0 ? 0.0 : 2.0 * d * std::sqrt(eps_gap * xi_c2);

  // K_j^2 = K^2 + (eps_j - eps_gap) xi^2/c^2 in every region.
  RegionArray<double> shift_up = xi == 0.0 ? RegionArray<double>::Zero(row.eps_upper.size()).eval()
                                           : ((row.eps_upper - eps_gap) * xi_c2).eval();
  RegionArray<double> shift_lo = xi == 0.0 ? RegionArray<double>::Zero(row.eps_lower.size()).eval()
                                           : ((row.eps_lower - eps_gap) * xi_c2).eval();
  RegionArray<double> k_up(shift_up.size()), k_lo(shift_lo.size());

  const double exp_u0 = std::exp(-u0);
  auto integrand = [&](double t) -> Eigen::Array2d {
    const double u = u0 + t;
    const double K = u / (2.0 * d);
    const double K2 = K * K;
    for (Eigen::Index j = 0; j < k_up.size(); ++j) k_up(j) = std::sqrt(std::max(0.0, K2 + shift_up(j)));
    for (Eigen::Index j = 0; j < k_lo.size(); ++j) k_lo(j) = std::sqrt(std::max(0.0, K2 + shift_lo(j)));
    k_up(0) = K;
    k_lo(0) = K;
    const double decay = exp_u0 * std::exp(-t);
    double log_sum = 0.0, ratio_sum = 0.0;
    for (Polarization pol : {Polarization::TE, Polarization::TM}) {
      if (xi == 0.0 && pol == Polarization::TE) continue;  // r_TE = 0 at zero frequency
      const double r1 = stratified_response<double>(row.eps_upper, k_up, upper_thickness_, pol).r;
      const double r2 = stratified_response<double>(row.eps_lower, k_lo, lower_thickness_, pol).r;
      const double x = r1 * r2 * decay;
      log_sum += std::log1p(-x);
      ratio_sum += x / (1.0 - x);
    }
    return {u * log_sum, -u * u * ratio_sum};
  };

  std::vector<double> breaks{0.0};
  for (int level = quad_.levels - 1; level >= 0; --level) {
    const double hi = quad_.u_span / std::ldexp(1.0, level);
    const double lo = breaks.back();
    for (int s = 1; s <= quad_.segments_per_level; ++s)
      breaks.push_back(lo + (hi - lo) * s / quad_.segments_per_level);
  }
  AdaptiveOptions opt;
  opt.rel_tol = 0.1 * quad_.rel_tol;
  opt.max_intervals = quad_.max_intervals;
  const auto q = integrate_adaptive<Eigen::Array2d>(integrand, std::span<const double>(breaks), opt);
  const double e_pref = 1.0 / (8.0 * c::pi * d * d);
  const double p_pref = e_pref / d;
  return {e_pref * q.value(0), p_pref * q.value(1), e_pref * q.abs_error(0), p_pref * q.abs_error(1)};
}

CasimirResult LifshitzSolver::evaluate(double d) const {
  if (!(d > 0) || !std::isfinite(d)) throw ConfigError("separation must be positive");
  const double kt = c::k_boltzmann * grid_.temperature;
  const double eps_liquid = rows_.size() > 1 ? rows_[1].eps_upper(0) : make_row(1).eps_upper(0);
  const int floor_n = matsubara_floor(grid_.temperature, d, eps_liquid);

  double e_sum = 0.0, p_sum = 0.0, e_abs = 0.0, p_abs = 0.0, e_err = 0.0, p_err = 0.0;
  double prev_e = 0.0, prev_p = 0.0;
  double tail_e = 0.0, tail_p = 0.0;
  int quiet = 0;
  int n = 0;
  int stop_at = -1;
  const double tail_tol = 0.5 * quad_.rel_tol;
  for (;; ++n) {
    if (n >= quad_.max_matsubara) {
      std::ostringstream os;
      os << "Matsubara sum not converged within " << quad_.max_matsubara << " terms at d = " << d / c::nm
         << " nm";
      throw NumericalError(os.str(), kt * p_sum, kt * (p_err + tail_p));
    }
    FrequencyRow extra;
    const FrequencyRow* row = &extra;
    if (n < static_cast<int>(rows_.size()))
      row = &rows_[static_cast<std::size_t>(n)];
    else
      extra = make_row(n);
    const double w = grid_.weight(n);
    const Term t = term(*row, d);
    const double te = w * t.energy, tp = w * t.pressure;
    e_sum += te;
    p_sum += tp;
    e_abs += std::abs(te);
    p_abs += std::abs(tp);
    e_err += w * t.energy_err;
    p_err += w * t.pressure_err;

    if (stop_at >= 0) {
      if (n + 1 >= stop_at) break;
      prev_e = te;
      prev_p = tp;
      continue;
    }
    // Geometric extrapolation of the remaining terms.
    auto tail = [](double cur, double prev) {
      const double a = std::abs(cur), b = std::abs(prev);
      if (a == 0.0) return 0.0;
      if (b == 0.0 || a >= b) return std::numeric_limits<double>::infinity();
      const double q = a / b;
      return a * q / (1.0 - q);
    };
    if (n >= 2) {
      tail_e = tail(te, prev_e);
      tail_p = tail(tp, prev_p);
      const bool small = tail_e <= tail_tol * e_abs && tail_p <= tail_tol * p_abs;
      quiet = small ? quiet + 1 : 0;
      // Dielectric functions can cross at high frequency and flip the sign
      // of later terms, which no local extrapolation sees coming. The quiet
      // run must therefore cover a fixed fraction of the frequency range.
      if (quiet >= std::max(3, n / 4) && n >= floor_n) {
        stop_at = static_cast<int>(std::ceil(quad_.matsubara_factor * (n + 1)));
        if (n + 1 >= stop_at) break;
      }
    }
    prev_e = te;
    prev_p = tp;
  }
  const int used = n + 1;
  CasimirResult r;
  r.separation = d;
  r.energy_per_area = kt * e_sum;
  r.pressure = kt * p_sum;
  r.matsubara_terms_used = used;
  r.energy_abs_error = kt * (e_err + tail_e);
  r.pressure_abs_error = kt * (p_err + tail_p);
  r.energy_scale = kt * e_abs;
  r.pressure_scale = kt * p_abs;
  r.estimated_relative_error = std::max(e_abs > 0 ? (e_err + tail_e) / e_abs : 0.0,
                                        p_abs > 0 ? (p_err + tail_p) / p_abs : 0.0);
  if (r.estimated_relative_error > quad_.rel_tol) {
    std::ostringstream os;
    os << "Casimir quadrature did not reach tolerance " << quad_.rel_tol << " at d = " << d / c::nm
       << " nm (estimated " << r.estimated_relative_error << ")";
    throw NumericalError(os.str(), r.pressure, r.pressure_abs_error);
  }
  return r;
}

double casimir_energy_per_area(double d, double temperature, const LayerStack& upper,
                               const LayerStack& lower, const QuadratureSpec& quad) {
  return LifshitzSolver(upper, lower, temperature, quad, d).energy_per_area(d);
}

double casimir_pressure(double d, double temperature, const LayerStack& upper, const LayerStack& lower,
                        const QuadratureSpec& quad) {
  return LifshitzSolver(upper, lower, temperature, quad, d).pressure(d);
}

int matsubara_cutoff(double temperature, double d, double rel_tol, const LayerStack& upper,
                     const LayerStack& lower) {
  QuadratureSpec q;
  q.rel_tol = rel_tol;
  return LifshitzSolver(upper, lower, temperature, q, d).matsubara_cutoff(d);
}

}  // namespace casimir_fp
