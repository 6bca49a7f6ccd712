// stack.cpp
#include "casimir_fp/stack.hpp"

#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"

namespace casimir_fp {

namespace c = constants;

Eigen::ArrayXd LayerStack::thicknesses() const {
  Eigen::ArrayXd t(static_cast<Eigen::Index>(layers.size()));
  for (std::size_t i = 0; i < layers.size(); ++i) t(static_cast<Eigen::Index>(i)) = layers[i].thickness;
  return t;
}

std::vector<MaterialRef> LayerStack::regions() const {
  std::vector<MaterialRef> out;
  out.reserve(region_count());
  out.push_back(incident);
  for (const auto& l : layers) out.push_back(l.material);
  out.push_back(exit);
  return out;
}

void LayerStack::validate() const {
  if (!incident || !exit) throw ConfigError("layer stack needs both half-space materials");
  for (const auto& l : layers) {
    if (!l.material) throw ConfigError("layer without material");
    if (!(l.thickness > 0) || !std::isfinite(l.thickness))
      throw ConfigError("layer thickness must be positive and finite");
  }
}

double reflection_imag_freq(const RegionArray<double>& eps, const Eigen::ArrayXd& thickness, double xi,
                            double k_par, Polarization pol) {
  if (xi < 0 || k_par < 0) throw ConfigError("reflection needs xi >= 0 and k_par >= 0");
  RegionArray<double> K(eps.size());
  const double xi_c2 = (xi / c::speed_of_light) * (xi / c::speed_of_light);
  for (Eigen::Index j = 0; j < eps.size(); ++j)
    K(j) = xi == 0.0 ? k_par : std::sqrt(k_par * k_par + eps(j) * xi_c2);
  return stratified_response<double>(eps, K, thickness, pol).r;
}

double reflection_imag_freq(const LayerStack& stack, double xi, double k_par, Polarization pol) {
  stack.validate();
  const auto regions = stack.regions();
  RegionArray<double> eps(static_cast<Eigen::Index>(regions.size()));
  for (std::size_t j = 0; j < regions.size(); ++j)
    eps(static_cast<Eigen::Index>(j)) = regions[j]->eps_imag(xi);
  return reflection_imag_freq(eps, stack.thicknesses(), xi, k_par, pol);
}

RealFrequencyResponse response_real_freq(const RegionArray<std::complex<double>>& eps,
                                         const Eigen::ArrayXd& thickness, double omega,
                                         Polarization pol) {
  using cd = std::complex<double>;
  if (!(omega > 0)) throw ConfigError("real frequency must be > 0");
  const double k0 = omega / c::speed_of_light;
  RegionArray<cd> K(eps.size());
  RegionArray<cd> kz(eps.size());
  for (Eigen::Index j = 0; j < eps.size(); ++j) {
    kz(j) = std::sqrt(eps(j) * (k0 * k0));
    if (kz(j).imag() < 0) kz(j) = -kz(j);
    K(j) = cd(0.0, -1.0) * kz(j);
  }
  const auto resp = stratified_response<cd>(eps, K, thickness, pol);
  const Eigen::Index last = eps.size() - 1;
  double ratio = 0.0;
  if (pol == Polarization::TE)
    ratio = kz(last).real() / kz(0).real();
  else
    ratio = (kz(last) / eps(last)).real() / (kz(0) / eps(0)).real();
  return {resp.r, resp.t, std::norm(resp.r), std::norm(resp.t) * ratio};
}

RealFrequencyResponse response_real_freq(const LayerStack& stack, double omega, Polarization pol) {
  stack.validate();
  const auto regions = stack.regions();
  RegionArray<std::complex<double>> eps(static_cast<Eigen::Index>(regions.size()));
  for (std::size_t j = 0; j < regions.size(); ++j)
    eps(static_cast<Eigen::Index>(j)) = regions[j]->eps_real(omega);
  return response_real_freq(eps, stack.thicknesses(), omega, pol);
}

std::complex<double> reflection_real_freq(const LayerStack& stack, double omega, Polarization pol) {
  return response_real_freq(stack, omega, pol).r;
}

// ---------------------------------------------------------------------------

void CavityGeometry::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(plate_thickness, "plate thickness");
  positive(gap, "gap");
  positive(teflon_thickness, "Teflon thickness");
  positive(ito_thickness, "ITO thickness");
  positive(silica_thickness, "silica thickness");
  positive(temperature, "temperature");
  if (gate_temperature) positive(*gate_temperature, "gate temperature");
  if (matsubara_temperature) positive(*matsubara_temperature, "Matsubara temperature");
  if (voltage < 0) throw ConfigError("gate voltage must be >= 0");
}

GateState resolve_gate(const CavityGeometry& geometry, const MaterialLibrary& lib) {
  geometry.validate();
  return resolve_gate(lib.ito(), geometry.voltage, geometry.gate_temperature.value_or(geometry.temperature),
                      geometry.silica_thickness);
}

LayerStack build_lower_stack(const CavityGeometry& geometry, const GateState& gate,
                             const MaterialLibrary& lib) {
  geometry.validate();
  const double total = geometry.ito_thickness;
  if (gate.accumulation_thickness >= total) {
    std::ostringstream os;
    os << "accumulation thickness " << gate.accumulation_thickness / c::nm
       << " nm is not below the ITO thickness " << total / c::nm << " nm";
    throw ConfigError(os.str());
  }
  LayerStack s;
  s.incident = lib.glycerol();
  s.exit = lib.gold();
  s.layers.push_back({lib.teflon(), geometry.teflon_thickness});
  const double nb = lib.ito().background_density;
  if (gate.accumulation_density == nb) {
    s.layers.push_back({lib.ito_layer(nb), total});
  } else {
    const Layer background{lib.ito_layer(nb), total - gate.accumulation_thickness};
    const Layer accumulation{lib.ito_layer(gate.accumulation_density), gate.accumulation_thickness};
    if (geometry.placement == AccumulationPlacement::kAdjacentToSilica) {
      s.layers.push_back(background);
      s.layers.push_back(accumulation);
    } else {
      s.layers.push_back(accumulation);
      s.layers.push_back(background);
    }
  }
  s.layers.push_back({lib.silica(), geometry.silica_thickness});
  return s;
}

LayerStack build_lower_stack(const CavityGeometry& geometry, const MaterialLibrary& lib) {
  return build_lower_stack(geometry, resolve_gate(geometry, lib), lib);
}

LayerStack build_upper_stack(const CavityGeometry& geometry, const MaterialLibrary& lib) {
  if (!(geometry.plate_thickness > 0)) throw ConfigError("plate thickness must be positive");
  return LayerStack{lib.glycerol(), {{lib.gold(), geometry.plate_thickness}}, lib.glycerol()};
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json material_to_json(const MaterialRef& m) {
  if (const auto* ito = std::get_if<ItoLayerParams>(&m->parameters()))
    return {{"name", "ito"}, {"density_cm3", ito->carrier_density * 1e-6}};
  if (const auto* k = std::get_if<ConstantPermittivity>(&m->parameters()))
    return {{"name", "constant"}, {"value", k->value}};
  return {{"name", m->name()}};
}

MaterialRef material_from_json(const nlohmann::json& j, const MaterialLibrary& lib) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "gold") return lib.gold();
  if (name == "teflon") return lib.teflon();
  if (name == "silica") return lib.silica();
  if (name == "glycerol") return lib.glycerol();
  if (name == "ito") return lib.ito_layer(j.at("density_cm3").get<double>() * 1e6);
  if (name == "constant")
    return std::make_shared<const DielectricModel>("constant", ConstantPermittivity{j.at("value").get<double>()});
  throw ConfigError("unknown material '" + name + "' in stack description");
}

}  // namespace

nlohmann::json stack_to_json(const LayerStack& stack) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : stack.layers) {
    auto m = material_to_json(l.material);
    m["thickness_nm"] = l.thickness / c::nm;
    layers.push_back(m);
  }
  return {{"incident", material_to_json(stack.incident)},
          {"layers", layers},
          {"exit", material_to_json(stack.exit)}};
}

LayerStack stack_from_json(const nlohmann::json& doc, const MaterialLibrary& lib) {
  LayerStack s;
  s.incident = material_from_json(doc.at("incident"), lib);
  s.exit = material_from_json(doc.at("exit"), lib);
  for (const auto& l : doc.at("layers"))
    s.layers.push_back({material_from_json(l, lib), l.at("thickness_nm").get<double>() * c::nm});
  s.validate();
  return s;
}

}  // namespace casimir_fp
