// materials.hpp
//
// Dielectric response of the cavity materials at imaginary (Matsubara) and
// real frequencies. All frequencies are angular frequencies in rad/s.
#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace casimir_fp {

struct LorentzOscillator {
  double strength;  // dimensionless, S in S w0^2 / (w0^2 - w^2 - i w g)
  double center;    // rad/s
  double width;     // rad/s
};

// Drude free-carrier term plus interband Lorentz oscillators (gold).
struct DrudeLorentzParams {
  double plasma_frequency;  // rad/s
  double drude_damping;     // rad/s
  std::vector<LorentzOscillator> oscillators;
};

// Ninham-Parsegian oscillator table: eps(i xi) = 1 + sum C / (1 + (xi/w)^2).
struct OscillatorTerm {
  double strength;
  double frequency;     // rad/s
  double damping = 0.0; // rad/s, only used off the imaginary axis
};

struct OscillatorTable {
  std::vector<OscillatorTerm> terms;
};

// Jellison-Modine Tauc-Lorentz interband absorption, energies in eV.
struct TaucLorentzParams {
  double amplitude;   // A
  double center;      // E0
  double broadening;  // C
  double gap;         // Eg
};

struct ItoParams {
  double background_density = 1e25;   // N_b, m^-3
  double static_permittivity = 9.3;   // eps_ITO
  double effective_mass = 0.35;       // in units of the electron mass
  double drude_damping = 1.8e14;      // rad/s
  TaucLorentzParams tauc_lorentz{};
  double total_thickness = 5e-9;      // m
};

// Carrier-density-specific ITO region: Drude (density dependent) plus
// Tauc-Lorentz absorption; the imaginary-axis value is the Kramers-Kronig
// transform of that absorption.
struct ItoLayerParams {
  double carrier_density;  // m^-3
  ItoParams ito;
};

// Nondispersive dielectric, used for synthetic stacks.
struct ConstantPermittivity {
  double value;
};

// How a free-carrier material is treated in the zero-frequency Matsubara
// term. Gold always uses the conductor limit; ITO defaults to its declared
// static permittivity.
enum class ZeroFrequencyLimit { kStaticPermittivity, kConductor };

class DielectricModel {
 public:
  using Parameters =
      std::variant<DrudeLorentzParams, OscillatorTable, ItoLayerParams, ConstantPermittivity>;

  DielectricModel(std::string name, Parameters params,
                  ZeroFrequencyLimit zero_limit = ZeroFrequencyLimit::kStaticPermittivity);

  const std::string& name() const { return name_; }
  const Parameters& parameters() const { return params_; }

  // eps(i xi) >= 1. At xi = 0 returns static_permittivity(), which is +inf
  // for conductors.
  double eps_imag(double xi) const;
  std::complex<double> eps_real(double omega) const;
  double static_permittivity() const;
  bool is_conductor_at_zero_frequency() const;

  // Imaginary part of eps on the real axis, the input to Kramers-Kronig.
  double absorption(double omega) const;

 private:
  std::string name_;
  Parameters params_;
  ZeroFrequencyLimit zero_limit_;
};

using MaterialRef = std::shared_ptr<const DielectricModel>;

double eps_imag_freq(const DielectricModel& material, double xi);
std::complex<double> eps_real_freq(const DielectricModel& material, double omega);

// ---------------------------------------------------------------------------
// Kramers-Kronig

struct KkOptions {
  double rel_tol = 1e-8;
  double x_min = 1e8;   // rad/s, lower integration cutoff
  double x_max = 1e20;  // rad/s
  int max_intervals = 4000;
  // Relative size of the integrand at x_max above which decay is deemed
  // insufficient.
  double tail_tol = 1e-9;
};

struct KkResult {
  double value;
  double abs_error;
  bool converged;
};

// eps(i xi) = 1 + (2/pi) int_0^inf Im eps(x) x / (x^2 + xi^2) dx.
// Throws NumericalError carrying the partial estimate on failure.
double kk_transform(const std::function<double(double)>& im_eps, double xi,
                    const KkOptions& opt = {});
KkResult kk_integrate(const std::function<double(double)>& im_eps, double xi,
                      const KkOptions& opt = {});

// Real part on the real axis: 1 + (2/pi) P int_0^inf x Im eps(x) / (x^2 - w^2) dx,
// evaluated with the singularity subtracted.
double kk_real_part(const std::function<double(double)>& im_eps, double omega,
                    const KkOptions& opt = {});

double tauc_lorentz_absorption(const TaucLorentzParams& p, double omega);
double drude_plasma_frequency(double carrier_density, double effective_mass_ratio);

// ---------------------------------------------------------------------------
// Gate electrostatics

inline constexpr double kSilicaStaticPermittivity = 3.9;
inline constexpr double kSilicaBreakdownField = 3e9;  // 30 MV/cm in V/m

double accumulation_thickness(double background_density, double temperature, double eps_ito);
double breakdown_voltage(double silica_thickness);
// Throws BreakdownError when V_g exceeds breakdown_voltage(L_s).
double accumulation_density(double background_density, double voltage, double silica_thickness,
                            double accumulation_thickness);

struct GateState {
  double voltage;
  double temperature;
  double silica_thickness;
  double accumulation_thickness;
  double accumulation_density;
};

GateState resolve_gate(const ItoParams& ito, double voltage, double temperature,
                       double silica_thickness);

// ---------------------------------------------------------------------------
// Material data

class MaterialLibrary {
 public:
  static constexpr const char* kDataDirEnv = "CASIMIR_FP_DATA_DIR";
  static constexpr const char* kDataFileName = "materials.json";

  // Embedded default data set (same content as data/materials.json).
  static MaterialLibrary defaults();
  static MaterialLibrary from_json(const nlohmann::json& doc);
  static MaterialLibrary load(const std::filesystem::path& file);
  // $CASIMIR_FP_DATA_DIR/materials.json if the variable is set, else defaults().
  static MaterialLibrary from_environment();

  const MaterialRef& gold() const { return gold_; }
  const MaterialRef& teflon() const { return teflon_; }
  const MaterialRef& silica() const { return silica_; }
  const MaterialRef& glycerol() const { return glycerol_; }
  const ItoParams& ito() const { return ito_; }
  ZeroFrequencyLimit ito_zero_frequency() const { return ito_zero_; }
  MaterialRef ito_layer(double carrier_density) const;

  // Canonical text of the data set, used for checksums.
  const std::string& source_text() const { return source_; }
  const std::string& origin() const { return origin_; }

 private:
  MaterialRef gold_, teflon_, silica_, glycerol_;
  ItoParams ito_;
  ZeroFrequencyLimit ito_zero_ = ZeroFrequencyLimit::kStaticPermittivity;
  std::string source_;
  std::string origin_;
};

extern const char* const kEmbeddedMaterialData;

}  // namespace casimir_fp
