#include "casimir_fp/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "casimir_fp/errors.hpp"
#include "casimir_fp/parallel.hpp"

namespace casimir_fp {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string text_of(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number())
    throw ConfigError(key + ": unit-less value " + v.dump() +
                      " rejected; physical values need a unit, e.g. \"150nm\" or \"450V\"");
  throw ConfigError(key + ": expected a string, got " + v.dump());
}

double number_of(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(x)) return x;
  }
  throw ConfigError(key + ": expected a number, got " + v.dump());
}

int integer_of(const json& v, const std::string& key) {
  const double x = number_of(v, key);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(x);
}

bool bool_of(const json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
  }
  throw ConfigError(key + ": expected true or false");
}

const char* si_unit(Dimension dim) {
  switch (dim) {
    case Dimension::kLength: return "m";
    case Dimension::kVoltage: return "V";
    case Dimension::kTemperature: return "K";
    case Dimension::kArea: return "m2";
    case Dimension::kFrequency: return "rad/s";
    case Dimension::kDensity: return "kg/m3";
    case Dimension::kAcceleration: return "m/s2";
  }
  return "";
}

struct Entry {
  std::string key;
  std::function<void(ScenarioConfig&, const json&)> set;
  std::function<json(const ScenarioConfig&)> get;
};

template <typename Ref>
Entry physical(std::string key, Dimension dim, Ref ref) {
  return {key,
          [=](ScenarioConfig& c, const json& v) { ref(c) = parse_quantity(text_of(v, key), dim); },
          [=](const ScenarioConfig& c) { return json(format_real(ref(c)) + si_unit(dim)); }};
}

template <typename Ref>
Entry real(std::string key, Ref ref) {
  return {key, [=](ScenarioConfig& c, const json& v) { ref(c) = number_of(v, key); },
          [=](const ScenarioConfig& c) { return json(ref(c)); }};
}

template <typename Ref>
Entry integer(std::string key, Ref ref) {
  return {key, [=](ScenarioConfig& c, const json& v) { ref(c) = integer_of(v, key); },
          [=](const ScenarioConfig& c) { return json(ref(c)); }};
}

template <typename Ref>
Entry optional_temperature(std::string key, Ref ref) {
  return {key,
          [=](ScenarioConfig& c, const json& v) {
            if (v.is_null() || (v.is_string() && v.get<std::string>() == "none")) ref(c).reset();
            else ref(c) = parse_quantity(text_of(v, key), Dimension::kTemperature);
          },
          [=](const ScenarioConfig& c) {
            return ref(c) ? json(format_real(*ref(c)) + "K") : json(nullptr);
          }};
}

#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = [] {
    using D = Dimension;
    std::vector<Entry> v{
        physical("geometry.plate", D::kLength, FIELD(geometry.plate_thickness)),
        physical("geometry.gap", D::kLength, FIELD(geometry.gap)),
        physical("geometry.teflon", D::kLength, FIELD(geometry.teflon_thickness)),
        physical("geometry.ito", D::kLength, FIELD(geometry.ito_thickness)),
        physical("geometry.silica", D::kLength, FIELD(geometry.silica_thickness)),
        {"geometry.placement",
         [](ScenarioConfig& c, const json& v) {
           const std::string s = text_of(v, "geometry.placement");
           if (s == "silica") c.geometry.placement = AccumulationPlacement::kAdjacentToSilica;
           else if (s == "teflon") c.geometry.placement = AccumulationPlacement::kAdjacentToTeflon;
           else throw ConfigError("geometry.placement: expected \"silica\" or \"teflon\"");
         },
         [](const ScenarioConfig& c) {
           return json(c.geometry.placement == AccumulationPlacement::kAdjacentToSilica ? "silica"
                                                                                       : "teflon");
         }},
        {"gate.voltage",
         [](ScenarioConfig& c, const json& v) { c.voltage = parse_voltage(text_of(v, "gate.voltage")); },
         [](const ScenarioConfig& c) { return json(c.voltage.str()); }},
        physical("temperature", D::kTemperature, FIELD(geometry.temperature)),
        physical("forces.gold_density", D::kDensity, FIELD(forces.gold_density)),
        physical("forces.liquid_density", D::kDensity, FIELD(forces.liquid_density)),
        physical("forces.gravity", D::kAcceleration, FIELD(forces.gravity)),
        real("numerics.rel_tol", FIELD(quad.rel_tol)),
        integer("numerics.levels", FIELD(quad.levels)),
        integer("numerics.segments_per_level", FIELD(quad.segments_per_level)),
        real("numerics.u_span", FIELD(quad.u_span)),
        integer("numerics.max_intervals", FIELD(quad.max_intervals)),
        integer("numerics.max_matsubara", FIELD(quad.max_matsubara)),
        real("numerics.matsubara_factor", FIELD(quad.matsubara_factor)),
        integer("numerics.scan_points", FIELD(solver.scan_points)),
        physical("numerics.root_tolerance", D::kLength, FIELD(solver.x_tolerance)),
        real("numerics.residual_tolerance", FIELD(solver.residual_tolerance)),
        physical("numerics.slope_step", D::kLength, FIELD(solver.slope_step)),
        integer("numerics.max_iterations", FIELD(solver.max_iterations)),
        physical("numerics.bracket_min", D::kLength, FIELD(bracket.first)),
        physical("numerics.bracket_max", D::kLength, FIELD(bracket.second)),
        physical("spectrum.lambda_min", D::kLength, FIELD(spectrum.lambda_min)),
        physical("spectrum.lambda_max", D::kLength, FIELD(spectrum.lambda_max)),
        integer("spectrum.points", FIELD(spectrum.points)),
        real("spectrum.depth_threshold", FIELD(resonance.depth_threshold)),
        real("spectrum.reflectance_band", FIELD(reflectance_band)),
        physical("spectrum.readout_step", D::kLength, FIELD(readout_step)),
        physical("brownian.area", D::kArea, FIELD(area)),
        physical("brownian.d_min", D::kLength, FIELD(profile.d_min)),
        physical("brownian.d_max", D::kLength, FIELD(profile.d_max)),
        integer("brownian.points", FIELD(profile.points)),
        physical("brownian.anchor_spacing", D::kLength, FIELD(profile.anchor_spacing)),
        real("brownian.window_kt", FIELD(profile.window_kt)),
        integer("brownian.well_points", FIELD(profile.well_points)),
        optional_temperature("diagnostics.gate_temperature", FIELD(geometry.gate_temperature)),
        optional_temperature("diagnostics.matsubara_temperature",
                             FIELD(geometry.matsubara_temperature)),
        {"materials",
         [](ScenarioConfig& c, const json& v) {
           if (v.is_null()) c.material_data.reset();
           else c.material_data = std::filesystem::path(text_of(v, "materials"));
         },
         [](const ScenarioConfig& c) {
           return c.material_data ? json(c.material_data->string()) : json(nullptr);
         }},
        {"output.dir",
         [](ScenarioConfig& c, const json& v) { c.out_dir = text_of(v, "output.dir"); },
         [](const ScenarioConfig& c) { return json(c.out_dir.string()); }},
        {"output.json",
         [](ScenarioConfig& c, const json& v) { c.json_mirror = bool_of(v, "output.json"); },
         [](const ScenarioConfig& c) { return json(c.json_mirror); }},
        integer("jobs", FIELD(jobs)),
    };
    return v;
  }();
  return e;
}

#undef FIELD

const Entry* find_entry(const std::string& key) {
  for (const Entry& e : entries())
    if (e.key == key) return &e;
  return nullptr;
}

json::json_pointer pointer_of(const std::string& key) {
  std::string p = "/" + key;
  for (char& ch : p)
    if (ch == '.') ch = '/';
  return json::json_pointer(p);
}

void check_range(double v, double lo, double hi, const char* what, const char* unit, double scale) {
  if (!(v > lo) || !(v <= hi)) {
    std::ostringstream msg;
    msg << what << " = " << v / scale << " " << unit << " is outside (" << lo / scale << ", "
        << hi / scale << "] " << unit;
    throw ConfigError(msg.str());
  }
}

}  // namespace

const std::vector<std::string>& ScenarioConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const Entry& e : entries()) out.push_back(e.key);
    return out;
  }();
  return k;
}

void ScenarioConfig::set(const std::string& key, const json& value) {
  const Entry* e = find_entry(key);
  if (!e) throw ConfigError("unknown configuration key '" + key + "'");
  e->set(*this, value);
}

void ScenarioConfig::merge(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  std::function<void(const json&, const std::string&)> walk = [&](const json& node,
                                                                   const std::string& prefix) {
    for (const auto& [k, v] : node.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object() && !find_entry(key)) walk(v, key);
      else set(key, v);
    }
  };
  walk(doc, "");
}

double ScenarioConfig::breakdown() const { return breakdown_voltage(geometry.silica_thickness); }

CavityGeometry ScenarioConfig::resolved_geometry() const {
  CavityGeometry g = geometry;
  const double vb = breakdown();
  g.voltage = voltage.resolve(vb);
  if (g.voltage > vb * (1.0 + 1e-12)) throw BreakdownError(g.voltage, vb);
  return g;
}

EquilibriumSettings ScenarioConfig::equilibrium_settings() const {
  return {quad, solver, forces, bracket};
}

BrownianSettings ScenarioConfig::brownian_settings() const {
  return {equilibrium_settings(), profile};
}

StimulusSettings ScenarioConfig::stimulus_settings() const {
  SpectrumOptions s = spectrum;
  s.jobs = 1;
  return {equilibrium_settings(), s, resonance};
}

MaterialLibrary ScenarioConfig::load_materials() const {
  if (!material_data) return MaterialLibrary::from_environment();
  std::filesystem::path file = *material_data;
  if (std::filesystem::is_directory(file)) file /= MaterialLibrary::kDataFileName;
  return MaterialLibrary::load(file);
}

void ScenarioConfig::validate() const {
  geometry.validate();
  constexpr double nm = 1e-9;
  check_range(geometry.plate_thickness, 0, 10e-6, "plate thickness", "nm", nm);
  check_range(geometry.gap, 0, 10e-6, "gap", "nm", nm);
  check_range(geometry.teflon_thickness, 0, 10e-6, "Teflon thickness", "nm", nm);
  check_range(geometry.ito_thickness, 0, 10e-6, "ITO thickness", "nm", nm);
  check_range(geometry.silica_thickness, 0, 10e-6, "silica thickness", "nm", nm);
  check_range(geometry.temperature, 0, 2000, "temperature", "K", 1);
  if (voltage.value < 0) throw ConfigError("gate voltage must be >= 0");
  quad.validate();
  BodyForces f = forces;
  f.plate_thickness = geometry.plate_thickness;
  f.validate();
  if (!(bracket.first > 0) || !(bracket.second > bracket.first))
    throw ConfigError("root bracket must satisfy 0 < min < max");
  if (solver.scan_points < 3 || !(solver.x_tolerance > 0) || !(solver.residual_tolerance > 0) ||
      !(solver.slope_step > 0) || solver.max_iterations < 1)
    throw ConfigError("invalid equilibrium solver settings");
  spectrum.validate();
  if (!(resonance.depth_threshold > 0 && resonance.depth_threshold < 1))
    throw ConfigError("dip depth threshold must lie in (0, 1)");
  if (!(reflectance_band > 0 && reflectance_band < 1))
    throw ConfigError("reflectance band must lie in (0, 1)");
  if (!(readout_step > 0)) throw ConfigError("readout step must be positive");
  profile.validate();
  if (!(area > 0) || !std::isfinite(area)) throw ConfigError("plate area must be positive");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  resolved_geometry();
}

json ScenarioConfig::to_json() const {
  json out = json::object();
  for (const Entry& e : entries()) out[pointer_of(e.key)] = e.get(*this);
  return out;
}

ScenarioConfig parse_config(const std::optional<std::filesystem::path>& file,
                            const std::vector<std::pair<std::string, std::string>>& flags) {
  ScenarioConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in)
      throw ConfigError("cannot open config file '" + file->string() + "': " + std::strerror(errno));
    json doc;
    try {
      doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + file->string() + "': " + e.what());
    }
    config.merge(doc);
  }
  for (const auto& [key, value] : flags) config.set(key, json(value));
  config.validate();
  return config;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

RunManifest::RunManifest(std::string command, const ScenarioConfig& config,
                         const MaterialLibrary& lib)
    : command_(std::move(command)), config_(config.to_json()) {
  add_checksum("materials", lib.source_text());
}

void RunManifest::add_checksum(const std::string& name, std::string_view content) {
  checksums_[name] = fnv1a_hex(content);
}

void RunManifest::add_output(const std::filesystem::path& file) { outputs_.push_back(file.string()); }

void RunManifest::add_error(const std::string& message) { errors_.push_back(message); }

std::string RunManifest::hash() const {
  // Output location, job count and the data path do not change results; the
  // data content enters through its checksum.
  json c = config_;
  c.erase("output");
  c.erase("jobs");
  c.erase("materials");
  const json key{{"tool_version", kToolVersion},
                 {"command", command_},
                 {"config", c},
                 {"checksums", checksums_}};
  return fnv1a_hex(key.dump());
}

json RunManifest::to_json() const {
  json stages = json::array();
  for (const auto& [name, seconds] : stage_seconds_)
    stages.push_back({{"stage", name}, {"wall_seconds", seconds}});
  return {{"tool_version", kToolVersion}, {"command", command_}, {"hash", hash()},
          {"config", config_},            {"checksums", checksums_}, {"stages", stages},
          {"outputs", outputs_},          {"errors", errors_}};
}

void RunManifest::write(const std::filesystem::path& file) const {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "': " + std::strerror(errno));
  out << to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "': " + std::strerror(errno));
}

void rethrow_in_stage(const std::string& stage) {
  const std::string p = "stage '" + stage + "': ";
  try {
    throw;
  } catch (const ResonanceNotDetectable& e) {
    throw ResonanceNotDetectable(p + e.what(), e.partial_estimate(), e.error_estimate());
  } catch (const NoSuspensionError& e) {
    throw NoSuspensionError(p + e.what(), e.partial_estimate(), e.error_estimate());
  } catch (const NumericalError& e) {
    throw NumericalError(p + e.what(), e.partial_estimate(), e.error_estimate());
  } catch (const ConfigError& e) {
    throw ConfigError(p + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(p + e.what());
  }
}

// ---------------------------------------------------------------------------
// Table drivers

Schema pressure_schema() {
  return {{"d_nm"}, {"pressure_Pa"}, {"energy_J_per_m2"}, {"n_terms", CellKind::kInteger}, {"rel_err"}};
}
Schema equilibrium_schema() {
  return {{"axis_value"}, {"d_e_nm"}, {"zero_crossing_nm"}, {"stable", CellKind::kInteger}};
}
Schema spectrum_schema() { return {{"lambda_nm"}, {"R"}}; }
Schema resonance_schema() {
  return {{"stimulus"}, {"d_e_nm"}, {"lambda_res_nm"}, {"Q"}, {"delta_lambda_nm"}};
}
Schema brownian_schema() { return {{"d_nm"}, {"rho_per_nm"}}; }
Schema brownian_summary_schema() {
  return {{"d_mean_nm"}, {"d_e_nm"}, {"offset_nm"}, {"peak_rho"}};
}

std::vector<double> linear_grid(double from, double to, int points) {
  if (points < 1) throw ConfigError("grid needs at least one point");
  if (points == 1) return {from};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = from + (to - from) * i / (points - 1);
  g.back() = to;
  return g;
}

namespace {

double axis_scale(SweepAxis axis) { return axis == SweepAxis::kSilicaThickness ? 1e9 : 1.0; }

std::string node_error(SweepAxis axis, double value, const std::string& what) {
  std::ostringstream os;
  os << axis_name(axis) << " = " << value * axis_scale(axis)
     << (axis == SweepAxis::kVoltage ? " V" : axis == SweepAxis::kTemperature ? " K" : " nm")
     << ": " << what;
  return os.str();
}

double nm_or_nan(const std::optional<double>& v) { return v ? *v * 1e9 : kNaN; }

}  // namespace

Table pressure_table(const ScenarioConfig& config, const MaterialLibrary& lib, double d_min,
                     double d_max, int points) {
  if (!(d_min > 0) || !(d_max >= d_min)) throw ConfigError("separation range must satisfy 0 < min <= max");
  const CavityGeometry g = config.resolved_geometry();
  const GateState gate = resolve_gate(g, lib);
  const LifshitzSolver solver(build_upper_stack(g, lib), build_lower_stack(g, gate, lib),
                              g.lifshitz_temperature(), config.quad, d_min);
  const std::vector<double> d = linear_grid(d_min, d_max, points);
  std::vector<CasimirResult> r(d.size());
  parallel_for(d.size(), config.jobs, [&](std::size_t i) { r[i] = solver.evaluate(d[i]); });
  Table t{pressure_schema(), {}};
  for (std::size_t i = 0; i < d.size(); ++i)
    t.add({d[i] * 1e9, r[i].pressure, r[i].energy_per_area,
           static_cast<std::int64_t>(r[i].matsubara_terms_used), r[i].estimated_relative_error});
  return t;
}

Table equilibrium_table(const ScenarioConfig& config, const MaterialLibrary& lib, SweepAxis axis,
                        const std::vector<double>& grid, std::vector<std::string>* errors) {
  CavityGeometry base = config.geometry;
  if (axis != SweepAxis::kVoltage) base = config.resolved_geometry();
  const EquilibriumSweep sweep =
      sweep_equilibrium(axis, grid, base, lib, config.equilibrium_settings(), config.jobs);
  Table t{equilibrium_schema(), {}};
  for (const SweepNode& n : sweep.nodes) {
    const double x = n.axis_value * axis_scale(axis);
    if (n.point)
      t.add({x, n.point->d_e * 1e9, nm_or_nan(n.point->casimir_zero_crossing),
             std::int64_t{n.point->stable ? 1 : 0}});
    else {
      t.add({x, kNaN, kNaN, std::int64_t{0}});
      if (errors) errors->push_back(node_error(axis, n.axis_value, n.error));
    }
  }
  return t;
}

Table spectrum_table(const ScenarioConfig& config, const MaterialLibrary& lib, double d) {
  SpectrumOptions opt = config.spectrum;
  opt.jobs = config.jobs;
  const Spectrum s = cavity_spectrum(config.resolved_geometry(), d, lib, opt);
  Table t{spectrum_schema(), {}};
  for (Eigen::Index i = 0; i < s.wavelength.size(); ++i)
    t.add({std::round(s.wavelength(i) * 1e15) / 1e6, s.reflectance(i)});
  return t;
}

Table resonance_table(const ScenarioConfig& config, const MaterialLibrary& lib, SweepAxis axis,
                      const std::vector<double>& grid, std::vector<std::string>* errors) {
  CavityGeometry base = config.geometry;
  if (axis != SweepAxis::kVoltage) base = config.resolved_geometry();
  const StimulusSweep sweep =
      resonance_vs_stimulus(axis, grid, base, lib, config.stimulus_settings(), config.jobs);
  Table t{resonance_schema(), {}};
  for (const StimulusRow& r : sweep.rows) {
    const double lam = r.resonance ? r.resonance->lambda_res * 1e9 : kNaN;
    const double q = r.resonance ? r.resonance->q_factor : kNaN;
    t.add({r.stimulus * axis_scale(axis), nm_or_nan(r.d_e), lam, q, nm_or_nan(r.delta_lambda)});
    if (!r.error.empty() && errors) errors->push_back(node_error(axis, r.stimulus, r.error));
  }
  return t;
}

BrownianTables brownian_tables(const ScenarioConfig& config, const MaterialLibrary& lib) {
  const PotentialProfile profile =
      potential_profile(config.resolved_geometry(), lib, config.area, config.brownian_settings());
  const PositionDistribution p = position_distribution(profile);
  BrownianTables out{{brownian_schema(), {}}, {brownian_summary_schema(), {}}};
  for (Eigen::Index i = 0; i < p.d.size(); ++i) out.density.add({p.d(i) * 1e9, p.rho(i) * 1e-9});
  out.summary.add({p.mean * 1e9, p.equilibrium * 1e9, p.offset * 1e9, p.peak_density * 1e-9});
  return out;
}

}  // namespace casimir_fp
