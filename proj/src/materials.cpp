// materials.cpp
#include "casimir_fp/materials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"
#include "casimir_fp/quadrature.hpp"

namespace casimir_fp {

namespace c = constants;

BreakdownError::BreakdownError(double voltage, double breakdown)
    : ConfigError([&] {
        std::ostringstream os;
        os << "gate voltage " << voltage << " V exceeds the breakdown voltage V_b = " << breakdown
           << " V";
        return os.str();
      }()),
      voltage_(voltage),
      breakdown_(breakdown) {}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double drude_lorentz_imag(const DrudeLorentzParams& p, double xi) {
  double eps = 1.0 + p.plasma_frequency * p.plasma_frequency / (xi * (xi + p.drude_damping));
  for (const auto& o : p.oscillators)
    eps += o.strength * o.center * o.center / (o.center * o.center + xi * xi + xi * o.width);
  return eps;
}

std::complex<double> drude_lorentz_real(const DrudeLorentzParams& p, double w) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  cd eps = 1.0 - p.plasma_frequency * p.plasma_frequency / (w * (w + i * p.drude_damping));
  for (const auto& o : p.oscillators)
    eps += o.strength * o.center * o.center / (o.center * o.center - w * w - i * w * o.width);
  return eps;
}

double table_imag(const OscillatorTable& t, double xi) {
  double eps = 1.0;
  for (const auto& term : t.terms)
    eps += term.strength * term.frequency * term.frequency /
           (term.frequency * term.frequency + xi * xi + xi * term.damping);
  return eps;
}

std::complex<double> table_real(const OscillatorTable& t, double w) {
  const std::complex<double> i(0.0, 1.0);
  std::complex<double> eps = 1.0;
  for (const auto& term : t.terms)
    eps += term.strength * term.frequency * term.frequency /
           (term.frequency * term.frequency - w * w - i * w * term.damping);
  return eps;
}

double ito_absorption(const ItoLayerParams& p, double w) {
  const double wp = drude_plasma_frequency(p.carrier_density, p.ito.effective_mass);
  const double g = p.ito.drude_damping;
  return wp * wp * g / (w * (w * w + g * g)) + tauc_lorentz_absorption(p.ito.tauc_lorentz, w);
}

// Break points (in log-frequency) for the Kramers-Kronig integrals.
std::vector<double> log_breaks(double lo, double hi, std::initializer_list<double> extra) {
  std::vector<double> b;
  const double s_lo = std::log(lo), s_hi = std::log(hi);
  for (double s = s_lo; s < s_hi; s += 1.5) b.push_back(s);
  b.push_back(s_hi);
  for (double x : extra)
    if (x > lo && x < hi) b.push_back(std::log(x));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(), [](double a, double c) { return std::abs(a - c) < 1e-9; }),
          b.end());
  return b;
}

}  // namespace

double drude_plasma_frequency(double carrier_density, double effective_mass_ratio) {
  return std::sqrt(carrier_density * c::elementary_charge * c::elementary_charge /
                   (c::vacuum_permittivity * effective_mass_ratio * c::electron_mass));
}

double tauc_lorentz_absorption(const TaucLorentzParams& p, double omega) {
  const double e = omega / c::ev_to_rad_per_s;
  if (e <= p.gap) return 0.0;
  const double de = e - p.gap;
  const double den = (e * e - p.center * p.center) * (e * e - p.center * p.center) +
                     p.broadening * p.broadening * e * e;
  return p.amplitude * p.center * p.broadening * de * de / (den * e);
}

// ---------------------------------------------------------------------------

DielectricModel::DielectricModel(std::string name, Parameters params, ZeroFrequencyLimit zero_limit)
    : name_(std::move(name)), params_(std::move(params)), zero_limit_(zero_limit) {
  std::visit(Overloaded{
                 [](const DrudeLorentzParams& p) {
                   if (!(p.plasma_frequency > 0) || p.drude_damping < 0)
                     throw ConfigError("Drude-Lorentz model needs plasma_frequency > 0 and damping >= 0");
                   for (const auto& o : p.oscillators)
                     if (!(o.width > 0) || !(o.center > 0) || o.strength < 0)
                       throw ConfigError("Lorentz oscillator needs center > 0, width > 0");
                 },
                 [](const OscillatorTable& t) {
                   for (const auto& term : t.terms)
                     if (!(term.strength > 0) || !(term.frequency > 0) || term.damping < 0)
                       throw ConfigError("oscillator table terms need C > 0 and w > 0");
                 },
                 [](const ItoLayerParams& p) {
                   if (!(p.carrier_density > 0)) throw ConfigError("ITO carrier density must be > 0");
                 },
                 [](const ConstantPermittivity& p) {
                   if (!(p.value >= 1.0)) throw ConfigError("constant permittivity must be >= 1");
                 },
             },
             params_);
}

double DielectricModel::static_permittivity() const {
  return std::visit(
      Overloaded{
          [](const DrudeLorentzParams&) { return std::numeric_limits<double>::infinity(); },
          [](const OscillatorTable& t) { return table_imag(t, 0.0); },
          [this](const ItoLayerParams& p) {
            return zero_limit_ == ZeroFrequencyLimit::kConductor
                       ? std::numeric_limits<double>::infinity()
                       : p.ito.static_permittivity;
          },
          [](const ConstantPermittivity& p) { return p.value; },
      },
      params_);
}

bool DielectricModel::is_conductor_at_zero_frequency() const {
  return std::isinf(static_permittivity());
}

double DielectricModel::eps_imag(double xi) const {
  if (xi < 0 || std::isnan(xi)) throw ConfigError("imaginary frequency must be >= 0");
  if (xi == 0.0) return static_permittivity();
  return std::visit(Overloaded{
                        [xi](const DrudeLorentzParams& p) { return drude_lorentz_imag(p, xi); },
                        [xi](const OscillatorTable& t) { return table_imag(t, xi); },
                        [xi](const ItoLayerParams& p) {
                          return kk_transform([&p](double x) { return ito_absorption(p, x); }, xi);
                        },
                        [](const ConstantPermittivity& p) { return p.value; },
                    },
                    params_);
}

std::complex<double> DielectricModel::eps_real(double omega) const {
  if (!(omega > 0)) throw ConfigError("real frequency must be > 0");
  return std::visit(
      Overloaded{
          [omega](const DrudeLorentzParams& p) { return drude_lorentz_real(p, omega); },
          [omega](const OscillatorTable& t) { return table_real(t, omega); },
          [omega](const ItoLayerParams& p) {
            auto im = [&p](double x) { return ito_absorption(p, x); };
            return std::complex<double>(kk_real_part(im, omega), im(omega));
          },
          [](const ConstantPermittivity& p) { return std::complex<double>(p.value, 0.0); },
      },
      params_);
}

double DielectricModel::absorption(double omega) const {
  if (const auto* ito = std::get_if<ItoLayerParams>(&params_)) return ito_absorption(*ito, omega);
  return eps_real(omega).imag();
}

double eps_imag_freq(const DielectricModel& material, double xi) { return material.eps_imag(xi); }

std::complex<double> eps_real_freq(const DielectricModel& material, double omega) {
  return material.eps_real(omega);
}

// ---------------------------------------------------------------------------
// Kramers-Kronig

KkResult kk_integrate(const std::function<double(double)>& im_eps, double xi, const KkOptions& opt) {
  if (xi < 0) throw ConfigError("imaginary frequency must be >= 0");
  const double lo = xi > 0 ? std::min(opt.x_min, 1e-4 * xi) : opt.x_min;
  const double hi = std::max(opt.x_max, 1e4 * xi);
  const auto breaks = log_breaks(lo, hi, {xi});
  // x = e^s, dx = x ds
  auto integrand = [&](double s) {
    const double x = std::exp(s);
    return x * x * im_eps(x) / (x * x + xi * xi);
  };
  AdaptiveOptions aopt;
  aopt.rel_tol = opt.rel_tol;
  aopt.max_intervals = opt.max_intervals;
  const auto q = integrate_adaptive<double>(integrand, breaks, aopt);
  const double tail = std::abs(integrand(std::log(hi)));
  const bool decays = tail <= opt.tail_tol * std::max(q.abs_integral, 1e-300);
  const double scale = 2.0 / c::pi;
  return {1.0 + scale * q.value, scale * q.abs_error, q.converged && decays};
}

double kk_transform(const std::function<double(double)>& im_eps, double xi, const KkOptions& opt) {
  const KkResult r = kk_integrate(im_eps, xi, opt);
  if (!r.converged)
    throw NumericalError("Kramers-Kronig quadrature failed (insufficient decay or tolerance not met)",
                         r.value, r.abs_error);
  return r.value;
}

double kk_real_part(const std::function<double(double)>& im_eps, double omega, const KkOptions& opt) {
  if (!(omega > 0)) throw ConfigError("real frequency must be > 0");
  const double lo = std::min(opt.x_min, 1e-4 * omega);
  const double hi = std::max(opt.x_max, 1e4 * omega);
  const double w_im = omega * im_eps(omega);
  const auto breaks = log_breaks(lo, hi, {omega});
  auto integrand = [&](double s) {
    const double x = std::exp(s);
    return x * (x * im_eps(x) - w_im) / ((x - omega) * (x + omega));
  };
  AdaptiveOptions aopt;
  aopt.rel_tol = opt.rel_tol;
  aopt.max_intervals = opt.max_intervals;
  const auto q = integrate_adaptive<double>(integrand, breaks, aopt);
  // Subtracted-constant contributions outside [lo, hi].
  const double below = (w_im - lo * im_eps(lo)) * lo / (omega * omega);
  const double above = -w_im / hi;
  if (!q.converged)
    throw NumericalError("Kramers-Kronig principal-value quadrature failed", q.value, q.abs_error);
  return 1.0 + 2.0 / c::pi * (q.value + below + above);
}

// ---------------------------------------------------------------------------
// Gate electrostatics

double accumulation_thickness(double background_density, double temperature, double eps_ito) {
  if (!(background_density > 0) || !(temperature > 0) || !(eps_ito > 0))
    throw ConfigError("accumulation thickness needs N_b > 0, T > 0, eps_ITO > 0");
  return c::pi / std::sqrt(2.0) *
         std::sqrt(c::k_boltzmann * temperature * c::vacuum_permittivity * eps_ito /
                   (background_density * c::elementary_charge * c::elementary_charge));
}

double breakdown_voltage(double silica_thickness) {
  if (silica_thickness < 0) throw ConfigError("silica thickness must be >= 0");
  // Rounded to 1 nV so that 150 nm gives 450 V rather than 450.00000000000006 V.
  return std::round(kSilicaBreakdownField * silica_thickness * 1e9) / 1e9;
}

double accumulation_density(double background_density, double voltage, double silica_thickness,
                            double accumulation_thickness) {
  if (voltage < 0) throw ConfigError("gate voltage must be >= 0");
  if (!(silica_thickness > 0) || !(accumulation_thickness > 0))
    throw ConfigError("accumulation density needs L_s > 0 and L_a > 0");
  const double vb = breakdown_voltage(silica_thickness);
  if (voltage > vb * (1.0 + 1e-12)) throw BreakdownError(voltage, vb);
  return background_density + c::vacuum_permittivity * kSilicaStaticPermittivity * voltage /
                                  (c::elementary_charge * silica_thickness * accumulation_thickness);
}

GateState resolve_gate(const ItoParams& ito, double voltage, double temperature,
                       double silica_thickness) {
  const double la = accumulation_thickness(ito.background_density, temperature, ito.static_permittivity);
  const double na = accumulation_density(ito.background_density, voltage, silica_thickness, la);
  return {voltage, temperature, silica_thickness, la, na};
}

}  // namespace casimir_fp
