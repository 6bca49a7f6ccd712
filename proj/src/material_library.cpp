// material_library.cpp
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"
#include "casimir_fp/materials.hpp"

namespace casimir_fp {

namespace {

using nlohmann::json;
constexpr double kEv = constants::ev_to_rad_per_s;

double number(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number())
    throw ConfigError(std::string("material data: missing numeric field '") + key + "'");
  return obj.at(key).get<double>();
}

// A frequency given either in eV or rad/s.
double frequency(const json& obj, const std::string& stem) {
  if (obj.contains(stem + "_ev")) return number(obj, (stem + "_ev").c_str()) * kEv;
  if (obj.contains(stem + "_rad_s")) return number(obj, (stem + "_rad_s").c_str());
  throw ConfigError("material data: missing field '" + stem + "_ev' or '" + stem + "_rad_s'");
}

DielectricModel::Parameters parse_parameters(const std::string& kind, const json& p) {
  if (kind == "drude_lorentz") {
    DrudeLorentzParams out{frequency(p, "plasma_frequency"), frequency(p, "drude_damping"), {}};
    for (const auto& o : p.value("oscillators", json::array()))
      out.oscillators.push_back({number(o, "strength"), frequency(o, "center"), frequency(o, "width")});
    return out;
  }
  if (kind == "oscillator_table") {
    OscillatorTable out;
    for (const auto& t : p.at("terms")) {
      OscillatorTerm term{number(t, "strength"), frequency(t, "frequency"), 0.0};
      if (t.contains("damping_ev") || t.contains("damping_rad_s")) term.damping = frequency(t, "damping");
      out.terms.push_back(term);
    }
    return out;
  }
  if (kind == "constant") return ConstantPermittivity{number(p, "value")};
  throw ConfigError("material data: unknown model_kind '" + kind + "'");
}

ItoParams parse_ito(const json& p, ZeroFrequencyLimit& zero) {
  ItoParams ito;
  ito.background_density = number(p, "background_density_cm3") * 1e6;
  ito.static_permittivity = number(p, "static_permittivity");
  ito.effective_mass = number(p, "effective_mass");
  ito.drude_damping = frequency(p, "drude_damping");
  ito.total_thickness = number(p, "total_thickness_nm") * constants::nm;
  const auto& tl = p.at("tauc_lorentz");
  ito.tauc_lorentz = {number(tl, "amplitude_ev"), number(tl, "center_ev"), number(tl, "broadening_ev"),
                      number(tl, "gap_ev")};
  const std::string z = p.value("zero_frequency", "static");
  if (z == "static")
    zero = ZeroFrequencyLimit::kStaticPermittivity;
  else if (z == "conductor")
    zero = ZeroFrequencyLimit::kConductor;
  else
    throw ConfigError("material data: ito zero_frequency must be 'static' or 'conductor'");
  if (!(ito.background_density > 0) || !(ito.effective_mass > 0) || !(ito.total_thickness > 0))
    throw ConfigError("material data: invalid ITO parameters");
  return ito;
}

}  // namespace

MaterialLibrary MaterialLibrary::from_json(const json& doc) {
  MaterialLibrary lib;
  bool have_ito = false;
  for (const auto& m : doc.at("materials")) {
    const std::string name = m.at("name").get<std::string>();
    const std::string kind = m.at("model_kind").get<std::string>();
    const json& params = m.at("parameters");
    if (kind == "ito") {
      lib.ito_ = parse_ito(params, lib.ito_zero_);
      have_ito = true;
      continue;
    }
    auto model = std::make_shared<const DielectricModel>(name, parse_parameters(kind, params),
                                                         ZeroFrequencyLimit::kConductor);
    if (name == "gold")
      lib.gold_ = model;
    else if (name == "teflon")
      lib.teflon_ = model;
    else if (name == "silica")
      lib.silica_ = model;
    else if (name == "glycerol")
      lib.glycerol_ = model;
  }
  if (!lib.gold_ || !lib.teflon_ || !lib.silica_ || !lib.glycerol_ || !have_ito)
    throw ConfigError("material data must define gold, teflon, silica, glycerol and ito");
  lib.source_ = doc.dump();
  lib.origin_ = "inline";
  return lib;
}

MaterialLibrary MaterialLibrary::defaults() {
  static const MaterialLibrary lib = [] {
    MaterialLibrary l = from_json(json::parse(kEmbeddedMaterialData));
    l.origin_ = "embedded";
    return l;
  }();
  return lib;
}

MaterialLibrary MaterialLibrary::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open material data file " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("material data file " + file.string() + ": " + e.what());
  }
  MaterialLibrary lib = from_json(doc);
  lib.origin_ = file.string();
  return lib;
}

MaterialLibrary MaterialLibrary::from_environment() {
  if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0')
    return load(std::filesystem::path(dir) / kDataFileName);
  return defaults();
}

MaterialRef MaterialLibrary::ito_layer(double carrier_density) const {
  std::ostringstream name;
  name << "ito(N=" << carrier_density * 1e-6 << "cm^-3)";
  return std::make_shared<const DielectricModel>(name.str(), ItoLayerParams{carrier_density, ito_},
                                                 ito_zero_);
}

}  // namespace casimir_fp
