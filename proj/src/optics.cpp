#include "casimir_fp/optics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"
#include "casimir_fp/parallel.hpp"

namespace casimir_fp {

namespace c = constants;
using cd = std::complex<double>;

LayerStack full_cavity_stack(const CavityGeometry& geometry, double d, const GateState& gate,
                             const MaterialLibrary& lib) {
  if (!(d > 0) || !std::isfinite(d)) throw ConfigError("cavity gap must be positive");
  const LayerStack lower = build_lower_stack(geometry, gate, lib);
  LayerStack s;
  s.incident = lib.glycerol();
  s.layers.push_back({lib.gold(), geometry.plate_thickness});
  s.layers.push_back({lib.glycerol(), d});
  s.layers.insert(s.layers.end(), lower.layers.begin(), lower.layers.end());
  s.exit = lower.exit;
  return s;
}

LayerStack full_cavity_stack(const CavityGeometry& geometry, double d, const MaterialLibrary& lib) {
  return full_cavity_stack(geometry, d, resolve_gate(geometry, lib), lib);
}

void SpectrumOptions::validate() const {
  if (!(lambda_min > 0) || !(lambda_max > lambda_min))
    throw ConfigError("wavelength range must satisfy 0 < min < max");
  if (points < 2) throw ConfigError("spectrum needs at least two points");
}

Eigen::ArrayXd SpectrumOptions::wavelengths() const {
  validate();
  return Eigen::ArrayXd::LinSpaced(points, lambda_min, lambda_max);
}

PermittivityTable::PermittivityTable(Eigen::ArrayXd wavelengths, int jobs)
    : wavelengths_(std::move(wavelengths)), jobs_(jobs) {}

const Eigen::ArrayXcd& PermittivityTable::operator()(const MaterialRef& material) {
  auto it = cache_.find(material.get());
  if (it != cache_.end()) return it->second.second;
  Eigen::ArrayXcd eps(wavelengths_.size());
  parallel_for(static_cast<std::size_t>(eps.size()), jobs_, [&](std::size_t i) {
    const double omega = 2.0 * c::pi * c::speed_of_light / wavelengths_(i);
    eps(i) = material->eps_real(omega);
  });
  return cache_.emplace(material.get(), std::make_pair(material, std::move(eps)))
      .first->second.second;
}

Spectrum reflectance_spectrum(const LayerStack& stack, PermittivityTable& table) {
  stack.validate();
  const auto regions = stack.regions();
  const Eigen::Index nr = static_cast<Eigen::Index>(regions.size());
  const Eigen::ArrayXd& lambda = table.wavelengths();
  Eigen::ArrayXXcd eps(nr, lambda.size());
  for (Eigen::Index j = 0; j < nr; ++j) eps.row(j) = table(regions[j]).transpose();

  const Eigen::ArrayXd thickness = stack.thicknesses();
  Spectrum out;
  out.wavelength = lambda;
  out.reflectance.resize(lambda.size());
  RegionArray<cd> column(nr);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    column = eps.col(i);
    const double omega = 2.0 * c::pi * c::speed_of_light / lambda(i);
    out.reflectance(i) = response_real_freq(column, thickness, omega).reflectance;
  }
  return out;
}

Spectrum reflectance_spectrum(const LayerStack& stack, const SpectrumOptions& options) {
  PermittivityTable table(options.wavelengths(), options.jobs);
  return reflectance_spectrum(stack, table);
}

Spectrum cavity_spectrum(const CavityGeometry& geometry, double d, const MaterialLibrary& lib,
                         const SpectrumOptions& options) {
  Spectrum s = reflectance_spectrum(full_cavity_stack(geometry, d, lib), options);
  s.gap = d;
  s.voltage = geometry.voltage;
  s.temperature = geometry.temperature;
  s.silica_thickness = geometry.silica_thickness;
  return s;
}

namespace {

// Vertex of the parabola through three points.
std::pair<double, double> parabola_vertex(double x0, double f0, double x1, double f1, double x2,
                                          double f2) {
  const double a = (x1 - x0) * (f1 - f2), b = (x1 - x2) * (f1 - f0);
  const double den = a - b;
  if (den == 0.0) return {x1, f1};
  const double xv = x1 - 0.5 * ((x1 - x0) * a - (x1 - x2) * b) / den;
  // Lagrange form evaluated at the vertex.
  const double l0 = (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
  return {xv, f0 * l0 + f1 * l1 + f2 * l2};
}

double crossing(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, Eigen::Index inside,
                Eigen::Index outside, double level) {
  const double t = (level - y(inside)) / (y(outside) - y(inside));
  return x(inside) + t * (x(outside) - x(inside));
}

}  // namespace

ResonanceSearch find_resonance(const Spectrum& spectrum, const ResonanceOptions& options) {
  const Eigen::ArrayXd& x = spectrum.wavelength;
  const Eigen::ArrayXd& R = spectrum.reflectance;
  const Eigen::Index n = R.size();
  if (x.size() != n || n < 3) throw ConfigError("spectrum needs at least three samples");

  ResonanceSearch out{};
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!(R(i) < R(i - 1) && R(i) <= R(i + 1))) continue;
    // Prominence: highest point on each side before the curve drops below R(i).
    Eigen::Index l = i, r = i;
    double left_max = R(i), right_max = R(i);
    while (l > 0 && R(l - 1) >= R(i)) left_max = std::max(left_max, R(--l));
    while (r + 1 < n && R(r + 1) >= R(i)) right_max = std::max(right_max, R(++r));
    const double depth = std::min(left_max, right_max) - R(i);
    if (!(depth >= options.depth_threshold)) continue;

    const auto [xv, fv] = parabola_vertex(x(i - 1), R(i - 1), x(i), R(i), x(i + 1), R(i + 1));
    const double half = fv + 0.5 * (std::min(left_max, right_max) - fv);
    Eigen::Index a = i, b = i;
    while (a > l && R(a - 1) < half) --a;
    while (b < r && R(b + 1) < half) ++b;
    const double x_lo = a > 0 ? crossing(x, R, a, a - 1, half) : x(a);
    const double x_hi = b + 1 < n ? crossing(x, R, b, b + 1, half) : x(b);
    const double fwhm = x_hi - x_lo;
    out.dips.push_back({xv, std::min(left_max, right_max) - fv, fv, fwhm,
                        fwhm > 0 ? xv / fwhm : 0.0, std::nullopt});
  }
  if (out.dips.empty()) {
    std::ostringstream msg;
    msg << "resonance not detectable: no reflectance dip deeper than "
        << options.depth_threshold << " in " << x(0) / c::nm << "-" << x(n - 1) / c::nm << " nm";
    throw ResonanceNotDetectable(msg.str(), R.minCoeff());
  }
  out.deepest = *std::max_element(out.dips.begin(), out.dips.end(),
                                  [](const Resonance& p, const Resonance& q) {
                                    return p.depth < q.depth;
                                  });
  return out;
}

std::pair<double, double> dip_location_interval(const Spectrum& spectrum, const Resonance& dip,
                                                double band) {
  const Eigen::ArrayXd& x = spectrum.wavelength;
  const Eigen::ArrayXd& R = spectrum.reflectance;
  const Eigen::Index n = R.size();
  const double level = dip.reflectance + 2.0 * band;
  Eigen::Index i = 0;
  (x - dip.lambda_res).abs().minCoeff(&i);
  Eigen::Index a = i, b = i;
  while (a > 0 && R(a - 1) <= level) --a;
  while (b + 1 < n && R(b + 1) <= level) ++b;
  const double lo = a > 0 ? crossing(x, R, a, a - 1, level) : x(0);
  const double hi = b + 1 < n ? crossing(x, R, b, b + 1, level) : x(n - 1);
  return {std::min(lo, dip.lambda_res), std::max(hi, dip.lambda_res)};
}

ReadoutCheck separation_readout(const CavityGeometry& geometry, double d, double delta_d,
                                const MaterialLibrary& lib, const SpectrumOptions& spectrum,
                                const ResonanceOptions& resonance, double band) {
  if (!(delta_d > 0) || !(d - delta_d > 0)) throw ConfigError("readout needs 0 < delta_d < d");
  const GateState gate = resolve_gate(geometry, lib);
  PermittivityTable table(spectrum.wavelengths(), spectrum.jobs);
  const Spectrum s0 = reflectance_spectrum(full_cavity_stack(geometry, d, gate, lib), table);
  const Spectrum s1 =
      reflectance_spectrum(full_cavity_stack(geometry, d - delta_d, gate, lib), table);
  const Resonance r0 = find_resonance(s0, resonance).deepest;
  // Track the same dip: nearest qualifying dip in the shifted spectrum.
  const auto dips = find_resonance(s1, resonance).dips;
  const Resonance r1 = *std::min_element(dips.begin(), dips.end(), [&](const auto& p, const auto& q) {
    return std::abs(p.lambda_res - r0.lambda_res) < std::abs(q.lambda_res - r0.lambda_res);
  });
  ReadoutCheck out{r0, r1, r1.lambda_res - r0.lambda_res, dip_location_interval(s0, r0, band),
                   dip_location_interval(s1, r1, band), false};
  out.resolvable = out.interval_d.second < out.interval_shifted.first ||
                   out.interval_shifted.second < out.interval_d.first;
  return out;
}

Resonance detect_resonance(const CavityGeometry& geometry, double d, const MaterialLibrary& lib,
                           const SpectrumOptions& spectrum, const ResonanceOptions& resonance,
                           double delta_d, double band) {
  const ReadoutCheck check =
      separation_readout(geometry, d, delta_d, lib, spectrum, resonance, band);
  if (!check.resolvable) {
    std::ostringstream msg;
    msg << "resonance not detectable: a " << delta_d / c::nm << " nm change of separation moves the "
        << check.at_d.lambda_res / c::nm << " nm dip by " << check.shift / c::nm
        << " nm, inside its +-" << band << " reflectance uncertainty ["
        << check.interval_d.first / c::nm << ", " << check.interval_d.second / c::nm << "] nm";
    throw ResonanceNotDetectable(msg.str(), check.at_d.lambda_res, check.shift);
  }
  return check.at_d;
}

std::optional<int> mode_order(const LayerStack& cavity, double lambda) {
  // Region 1 is the plate; the mirrors bound layers 1..end.
  if (cavity.layers.size() < 2 || !(lambda > 0)) return std::nullopt;
  const double omega = 2.0 * c::pi * c::speed_of_light / lambda;
  double path = 0.0;
  for (std::size_t j = 1; j < cavity.layers.size(); ++j) {
    const cd eps = cavity.layers[j].material->eps_real(omega);
    path += std::sqrt(eps).real() * cavity.layers[j].thickness;
  }
  return std::max(1, static_cast<int>(std::lround(2.0 * path / lambda)));
}

StimulusSweep resonance_vs_stimulus(SweepAxis axis, const std::vector<double>& grid,
                                    const CavityGeometry& base, const MaterialLibrary& lib,
                                    const StimulusSettings& settings, int jobs) {
  StimulusSweep sweep{axis, std::vector<StimulusRow>(grid.size()), std::nullopt};
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    StimulusRow& row = sweep.rows[i];
    row.stimulus = grid[i];
    try {
      const CavityGeometry g = with_axis(base, axis, grid[i]);
      const EquilibriumPoint eq = solve_equilibrium(g, lib, settings.equilibrium);
      row.d_e = eq.d_e;
      SpectrumOptions spectrum = settings.spectrum;
      spectrum.jobs = 1;
      const GateState gate = resolve_gate(g, lib);
      const LayerStack cavity = full_cavity_stack(g, eq.d_e, gate, lib);
      const ResonanceSearch found =
          find_resonance(reflectance_spectrum(cavity, spectrum), settings.resonance);
      row.resonance = found.deepest;
      row.resonance->mode_order = mode_order(cavity, found.deepest.lambda_res);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::optional<double> first, lo, hi;
  for (StimulusRow& row : sweep.rows) {
    if (!row.resonance) continue;
    const double l = row.resonance->lambda_res;
    if (!first) first = l;
    row.delta_lambda = l - *first;
    lo = lo ? std::min(*lo, l) : l;
    hi = hi ? std::max(*hi, l) : l;
  }
  if (lo) sweep.tuning_range = *hi - *lo;
  return sweep;
}

}  // namespace casimir_fp
