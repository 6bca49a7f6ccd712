#include <cmath>
#include <limits>
#include <sstream>

#include "casimir_fp/errors.hpp"
#include "casimir_fp/parallel.hpp"
#include "casimir_fp/scenario.hpp"

namespace casimir_fp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double nm = 1e-9;

// Grid coordinate in nm for label columns, without the binary noise of the
// metre-to-nanometre conversion.
double label_nm(double x) { return std::round(x / nm * 1e6) / 1e6; }

std::string current_message() {
  try {
    throw;
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

class FigureRun {
 public:
  FigureRun(const std::string& id, const ScenarioConfig& config)
      : id_(id), config_(config), lib_(config.load_materials()), manifest_("figure " + id, config, lib_) {}

  const ScenarioConfig& config() const { return config_; }
  const MaterialLibrary& lib() const { return lib_; }
  RunManifest& manifest() { return manifest_; }

  void emit(const std::string& name, const Table& table) {
    const std::filesystem::path file = config_.out_dir / (id_ + "_" + name + ".csv");
    emit_table(table, {file, config_.json_mirror}, manifest_.hash());
    manifest_.add_output(file);
    out_.files.push_back(file);
  }

  FigureOutput finish() {
    out_.manifest = config_.out_dir / (id_ + "_manifest.json");
    manifest_.write(out_.manifest);
    return out_;
  }

 private:
  std::string id_;
  ScenarioConfig config_;
  MaterialLibrary lib_;
  RunManifest manifest_;
  FigureOutput out_;
};

struct Solved {
  std::optional<EquilibriumPoint> point;
  std::string error;
};

std::vector<Solved> solve_all(const std::vector<CavityGeometry>& geometries, const FigureRun& run) {
  std::vector<Solved> out(geometries.size());
  const EquilibriumSettings settings = run.config().equilibrium_settings();
  parallel_for(geometries.size(), run.config().jobs, [&](std::size_t i) {
    try {
      out[i].point = solve_equilibrium(geometries[i], run.lib(), settings);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::string describe(const CavityGeometry& g) {
  std::ostringstream os;
  os << "L_s = " << g.silica_thickness / nm << " nm, V = " << g.voltage << " V, T = " << g.temperature
     << " K";
  return os.str();
}

void record_failures(const std::vector<CavityGeometry>& g, const std::vector<Solved>& s,
                     RunManifest& manifest) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!s[i].point) manifest.add_error(describe(g[i]) + ": " + s[i].error);
}

double d_e_nm(const Solved& s) { return s.point ? s.point->d_e / nm : kNaN; }
double zero_nm(const Solved& s) {
  return s.point && s.point->casimir_zero_crossing ? *s.point->casimir_zero_crossing / nm : kNaN;
}
std::int64_t stable(const Solved& s) { return s.point && s.point->stable ? 1 : 0; }

// Pressure curves for a family of geometries on one separation grid.
Table pressure_family(const std::vector<CavityGeometry>& family, const std::string& label_column,
                      const std::vector<double>& labels, const std::vector<double>& d,
                      const FigureRun& run) {
  const ScenarioConfig& cfg = run.config();
  std::vector<std::unique_ptr<LifshitzSolver>> solvers(family.size());
  parallel_for(family.size(), cfg.jobs, [&](std::size_t i) {
    const GateState gate = resolve_gate(family[i], run.lib());
    solvers[i] = std::make_unique<LifshitzSolver>(
        build_upper_stack(family[i], run.lib()), build_lower_stack(family[i], gate, run.lib()),
        family[i].lifshitz_temperature(), cfg.quad, d.front());
  });
  const std::size_t n = d.size();
  std::vector<CasimirResult> r(family.size() * n);
  parallel_for(r.size(), cfg.jobs, [&](std::size_t k) { r[k] = solvers[k / n]->evaluate(d[k % n]); });

  Table t{{{label_column},
           {"d_nm"},
           {"pressure_Pa"},
           {"energy_J_per_m2"},
           {"n_terms", CellKind::kInteger},
           {"rel_err"},
           {"load_Pa"}},
          {}};
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double load = gb_pressure(forces_for(family[i], cfg.forces));
    for (std::size_t j = 0; j < n; ++j) {
      const CasimirResult& x = r[i * n + j];
      t.add({labels[i], label_nm(d[j]), x.pressure, x.energy_per_area,
             static_cast<std::int64_t>(x.matsubara_terms_used), x.estimated_relative_error, load});
    }
  }
  return t;
}

Table equilibrium_family(const std::vector<CavityGeometry>& family, const std::string& label_column,
                         const std::vector<double>& labels, FigureRun& run) {
  const std::vector<Solved> s = solve_all(family, run);
  record_failures(family, s, run.manifest());
  Table t{{{label_column}, {"d_e_nm"}, {"zero_crossing_nm"}, {"stable", CellKind::kInteger}}, {}};
  for (std::size_t i = 0; i < s.size(); ++i) t.add({labels[i], d_e_nm(s[i]), zero_nm(s[i]), stable(s[i])});
  return t;
}

std::vector<double> step_grid(double from, double to, double step) {
  const int n = static_cast<int>(std::lround((to - from) / step)) + 1;
  return linear_grid(from, to, n);
}

// ---------------------------------------------------------------------------

void fig2a(FigureRun& run) {
  const CavityGeometry base = run.config().resolved_geometry();
  const double vb = run.config().breakdown();
  const std::vector<double> volts{0.0, vb / 3.0, 2.0 * vb / 3.0, vb};
  std::vector<CavityGeometry> family;
  for (double v : volts) family.push_back(with_axis(base, SweepAxis::kVoltage, v));
  const std::vector<double> d = step_grid(40 * nm, 200 * nm, 1 * nm);
  run.emit("pressure", run.manifest().stage("pressure curves", [&] {
    return pressure_family(family, "voltage_V", volts, d, run);
  }));
  run.emit("equilibrium", run.manifest().stage("equilibrium", [&] {
    return equilibrium_family(family, "voltage_V", volts, run);
  }));
}

void fig3a(FigureRun& run) {
  CavityGeometry base = run.config().resolved_geometry();
  base.voltage = 0.0;
  const std::vector<double> temps{300.0, 350.0, 400.0};
  std::vector<CavityGeometry> family;
  for (double t : temps) family.push_back(with_axis(base, SweepAxis::kTemperature, t));
  const std::vector<double> d = step_grid(40 * nm, 200 * nm, 1 * nm);
  run.emit("pressure", run.manifest().stage("pressure curves", [&] {
    return pressure_family(family, "temperature_K", temps, d, run);
  }));
  run.emit("equilibrium", run.manifest().stage("equilibrium", [&] {
    return equilibrium_family(family, "temperature_K", temps, run);
  }));
}

// d_e over (L_s, stimulus), with the shift from the first stimulus value.
Table silica_stimulus_grid(const std::vector<double>& silica, SweepAxis axis, int points,
                           bool voltage_to_breakdown, double from, double to, FigureRun& run) {
  CavityGeometry base = run.config().resolved_geometry();
  if (axis == SweepAxis::kTemperature) base.voltage = 0.0;
  std::vector<CavityGeometry> family;
  std::vector<double> stim;
  for (double ls : silica) {
    const double hi = voltage_to_breakdown ? breakdown_voltage(ls) : to;
    for (double x : linear_grid(from, hi, points)) {
      family.push_back(with_axis(with_axis(base, SweepAxis::kSilicaThickness, ls), axis, x));
      stim.push_back(x);
    }
  }
  const std::vector<Solved> s = solve_all(family, run);
  record_failures(family, s, run.manifest());
  const std::string col = axis == SweepAxis::kVoltage ? "voltage_V" : "temperature_K";
  Table t{{{"silica_nm"},
           {col},
           {"d_e_nm"},
           {"zero_crossing_nm"},
           {"stable", CellKind::kInteger},
           {"delta_d_nm"}},
          {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t first = i - i % static_cast<std::size_t>(points);
    t.add({label_nm(family[i].silica_thickness), stim[i], d_e_nm(s[i]), zero_nm(s[i]), stable(s[i]),
           d_e_nm(s[i]) - d_e_nm(s[first])});
  }
  return t;
}

void fig2b(FigureRun& run) {
  const std::vector<double> silica{100 * nm, 150 * nm, 200 * nm};
  run.emit("voltage_sweep", run.manifest().stage("voltage sweep", [&] {
    return silica_stimulus_grid(silica, SweepAxis::kVoltage, 11, true, 0.0, 0.0, run);
  }));
  run.emit("silica_inset", run.manifest().stage("silica inset", [&] {
    const std::vector<double> ls = step_grid(100 * nm, 300 * nm, 25 * nm);
    const Table full = silica_stimulus_grid(ls, SweepAxis::kVoltage, 2, true, 0.0, 0.0, run);
    Table t{{{"silica_nm"}, {"d_e_0V_nm"}, {"d_e_Vb_nm"}, {"delta_nm"}}, {}};
    for (std::size_t i = 0; i + 1 < full.rows.size(); i += 2) {
      const double a = std::get<double>(full.rows[i][2]), b = std::get<double>(full.rows[i + 1][2]);
      t.add({full.rows[i][0], a, b, a - b});
    }
    return t;
  }));
}

void fig3b(FigureRun& run) {
  const std::vector<double> silica{100 * nm, 150 * nm, 200 * nm};
  run.emit("temperature_sweep", run.manifest().stage("temperature sweep", [&] {
    return silica_stimulus_grid(silica, SweepAxis::kTemperature, 11, false, 300.0, 400.0, run);
  }));
}

// Reflectance over (L_s, lambda) at fixed d = 60 nm.
void fig4a(FigureRun& run) {
  const ScenarioConfig& cfg = run.config();
  const CavityGeometry base = cfg.resolved_geometry();
  const std::vector<double> silica = step_grid(50 * nm, 400 * nm, 5 * nm);
  const double d = 60 * nm;
  std::vector<Spectrum> spectra(silica.size());
  std::vector<std::optional<ResonanceSearch>> dips(silica.size());
  std::vector<std::optional<int>> orders(silica.size());
  run.manifest().stage("reflectance map", [&] {
    SpectrumOptions opt = cfg.spectrum;
    opt.jobs = 1;
    parallel_for(silica.size(), cfg.jobs, [&](std::size_t i) {
      CavityGeometry g = with_axis(base, SweepAxis::kSilicaThickness, silica[i]);
      const LayerStack cavity = full_cavity_stack(g, d, resolve_gate(g, run.lib()), run.lib());
      spectra[i] = reflectance_spectrum(cavity, opt);
      try {
        dips[i] = find_resonance(spectra[i], cfg.resonance);
        for (Resonance& r : dips[i]->dips) r.mode_order = mode_order(cavity, r.lambda_res);
      } catch (const ResonanceNotDetectable&) {
      }
    });
  });
  Table map{{{"silica_nm"}, {"lambda_nm"}, {"R"}}, {}};
  Table modes{{{"silica_nm"}, {"lambda_res_nm"}, {"depth"}, {"Q"}, {"mode_order", CellKind::kInteger}},
              {}};
  for (std::size_t i = 0; i < silica.size(); ++i) {
    const Spectrum& s = spectra[i];
    for (Eigen::Index k = 0; k < s.wavelength.size(); ++k)
      map.add({label_nm(silica[i]), label_nm(s.wavelength(k)), s.reflectance(k)});
    if (!dips[i]) continue;
    for (const Resonance& r : dips[i]->dips)
      modes.add({label_nm(silica[i]), r.lambda_res / nm, r.depth, r.q_factor,
                 std::int64_t{r.mode_order.value_or(0)}});
  }
  run.emit("reflectance", map);
  run.emit("dips", modes);
}

struct Stimulus {
  std::string axis;
  double value;
  CavityGeometry geometry;
};

void fig4b(FigureRun& run) {
  const ScenarioConfig& cfg = run.config();
  CavityGeometry base = cfg.resolved_geometry();
  base.voltage = 0.0;
  const double vb = cfg.breakdown();
  std::vector<Stimulus> nodes;
  for (double v : {0.0, vb / 2.0, vb})
    nodes.push_back({"voltage_V", v, with_axis(base, SweepAxis::kVoltage, v)});
  for (double t : {300.0, 350.0, 400.0})
    nodes.push_back({"temperature_K", t, with_axis(base, SweepAxis::kTemperature, t)});

  struct Result {
    std::optional<double> d_e;
    Spectrum spectrum;
    std::optional<Resonance> dip;
    std::string error;
  };
  std::vector<Result> res(nodes.size());
  run.manifest().stage("stimulus spectra", [&] {
    const StimulusSettings settings = cfg.stimulus_settings();
    parallel_for(nodes.size(), cfg.jobs, [&](std::size_t i) {
      try {
        const CavityGeometry& g = nodes[i].geometry;
        res[i].d_e = solve_equilibrium(g, run.lib(), settings.equilibrium).d_e;
        const LayerStack cavity = full_cavity_stack(g, *res[i].d_e, resolve_gate(g, run.lib()), run.lib());
        res[i].spectrum = reflectance_spectrum(cavity, settings.spectrum);
        res[i].dip = find_resonance(res[i].spectrum, settings.resonance).deepest;
      } catch (const std::exception& e) {
        res[i].error = e.what();
      }
    });
  });
  Table spectra{{{"axis", CellKind::kText}, {"stimulus"}, {"d_e_nm"}, {"lambda_nm"}, {"R"}}, {}};
  Table dips{{{"axis", CellKind::kText},
              {"stimulus"},
              {"d_e_nm"},
              {"lambda_res_nm"},
              {"Q"},
              {"delta_lambda_nm"}},
             {}};
  std::map<std::string, double> first;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Result& r = res[i];
    if (!r.error.empty()) run.manifest().add_error(describe(nodes[i].geometry) + ": " + r.error);
    const double de = r.d_e ? *r.d_e / nm : kNaN;
    for (Eigen::Index k = 0; k < r.spectrum.wavelength.size(); ++k)
      spectra.add({nodes[i].axis, nodes[i].value, de, label_nm(r.spectrum.wavelength(k)),
                   r.spectrum.reflectance(k)});
    double lam = kNaN, q = kNaN, delta = kNaN;
    if (r.dip) {
      lam = r.dip->lambda_res / nm;
      q = r.dip->q_factor;
      auto it = first.try_emplace(nodes[i].axis, lam).first;
      delta = lam - it->second;
    }
    dips.add({nodes[i].axis, nodes[i].value, de, lam, q, delta});
  }
  run.emit("spectra", spectra);
  run.emit("resonances", dips);

  // Readout of a small displacement at two silica thicknesses.
  const std::vector<double> silica{150 * nm, 50 * nm};
  struct Readout {
    double d = kNaN;
    std::optional<ReadoutCheck> check;
    Spectrum at_d, shifted;
    std::string status;
  };
  std::vector<Readout> out(silica.size());
  run.manifest().stage("readout", [&] {
    SpectrumOptions opt = cfg.spectrum;
    opt.jobs = 1;
    parallel_for(silica.size(), cfg.jobs, [&](std::size_t i) {
      const CavityGeometry g = with_axis(base, SweepAxis::kSilicaThickness, silica[i]);
      try {
        out[i].d = solve_equilibrium(g, run.lib(), cfg.equilibrium_settings()).d_e;
        out[i].at_d = cavity_spectrum(g, out[i].d, run.lib(), opt);
        out[i].shifted = cavity_spectrum(g, out[i].d - cfg.readout_step, run.lib(), opt);
        out[i].check = separation_readout(g, out[i].d, cfg.readout_step, run.lib(), opt,
                                          cfg.resonance, cfg.reflectance_band);
        out[i].status = out[i].check->resolvable ? "detectable" : "not detectable";
      } catch (const ResonanceNotDetectable& e) {
        out[i].status = "not detectable";
      } catch (const std::exception& e) {
        out[i].status = "failed";
        run.manifest().add_error(describe(g) + ": " + e.what());
      }
    });
  });
  Table readout{{{"silica_nm"},
                 {"d_nm"},
                 {"delta_d_nm"},
                 {"lambda_res_nm"},
                 {"lambda_shifted_nm"},
                 {"shift_nm"},
                 {"interval_lo_nm"},
                 {"interval_hi_nm"},
                 {"shifted_lo_nm"},
                 {"shifted_hi_nm"},
                 {"Q"},
                 {"status", CellKind::kText}},
                {}};
  Table readout_spectra{{{"silica_nm"}, {"d_nm"}, {"lambda_nm"}, {"R"}}, {}};
  for (std::size_t i = 0; i < silica.size(); ++i) {
    const Readout& r = out[i];
    const auto& c = r.check;
    readout.add({label_nm(silica[i]), r.d / nm, cfg.readout_step / nm,
                 c ? c->at_d.lambda_res / nm : kNaN, c ? c->at_shifted.lambda_res / nm : kNaN,
                 c ? c->shift / nm : kNaN, c ? c->interval_d.first / nm : kNaN,
                 c ? c->interval_d.second / nm : kNaN, c ? c->interval_shifted.first / nm : kNaN,
                 c ? c->interval_shifted.second / nm : kNaN, c ? c->at_d.q_factor : kNaN, r.status});
    for (const Spectrum* s : {&r.at_d, &r.shifted})
      for (Eigen::Index k = 0; k < s->wavelength.size(); ++k)
        readout_spectra.add({label_nm(silica[i]), s->gap / nm, label_nm(s->wavelength(k)), s->reflectance(k)});
  }
  run.emit("readout", readout);
  run.emit("readout_spectra", readout_spectra);
}

void fig5(FigureRun& run, double silica) {
  const ScenarioConfig& cfg = run.config();
  CavityGeometry base = with_axis(cfg.resolved_geometry(), SweepAxis::kSilicaThickness, silica);
  base.voltage = 0.0;
  base.temperature = 300.0;
  const double vb = breakdown_voltage(silica);
  const std::vector<Scenario> scenarios{
      {0.0, 300.0, silica, "voltage:0"},       {vb / 2.0, 300.0, silica, "voltage:Vb/2"},
      {vb, 300.0, silica, "voltage:Vb"},       {0.0, 300.0, silica, "temperature:300K"},
      {0.0, 350.0, silica, "temperature:350K"}, {0.0, 400.0, silica, "temperature:400K"}};
  const Comparison cmp = run.manifest().stage("distributions", [&] {
    return compare_distributions(scenarios, base, run.lib(), cfg.area, cfg.brownian_settings(),
                                 cfg.jobs);
  });

  Table density{{{"scenario", CellKind::kText},
                 {"voltage_V"},
                 {"temperature_K"},
                 {"d_nm"},
                 {"rho_per_nm"}},
                {}};
  Table summary{{{"scenario", CellKind::kText},
                 {"voltage_V"},
                 {"temperature_K"},
                 {"d_e_nm"},
                 {"d_mean_nm"},
                 {"offset_nm"},
                 {"peak_rho_per_nm"},
                 {"sigma_nm"},
                 {"normalization"},
                 {"error", CellKind::kText}},
                {}};
  for (const ScenarioSummary& s : cmp.summaries) {
    const Scenario& sc = s.scenario;
    if (!s.distribution) {
      run.manifest().add_error(sc.label + ": " + s.error);
      summary.add({sc.label, sc.voltage, sc.temperature, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, s.error});
      continue;
    }
    const PositionDistribution& p = *s.distribution;
    for (Eigen::Index i = 0; i < p.d.size(); ++i)
      density.add({sc.label, sc.voltage, sc.temperature, p.d(i) / nm, p.rho(i) * nm});
    summary.add({sc.label, sc.voltage, sc.temperature, p.equilibrium / nm, p.mean / nm, p.offset / nm,
                 p.peak_density * nm, std::sqrt(p.variance) / nm, p.normalization, std::string()});
  }
  Table overlap{{{"scenario_a", CellKind::kText}, {"scenario_b", CellKind::kText}, {"overlap"}}, {}};
  for (Eigen::Index i = 0; i < cmp.overlap.rows(); ++i)
    for (Eigen::Index j = 0; j < cmp.overlap.cols(); ++j)
      overlap.add({scenarios[i].label, scenarios[j].label, cmp.overlap(i, j)});
  run.emit("density", density);
  run.emit("summary", summary);
  run.emit("overlap", overlap);

  // Reflectance around the unbiased equilibrium: the dip stays sharp over the
  // range the plate explores.
  const auto& baseline = cmp.summaries.front().distribution;
  if (!baseline) return;
  const std::vector<double> d =
      step_grid(baseline->equilibrium - 30 * nm, baseline->equilibrium + 30 * nm, 1 * nm);
  std::vector<Spectrum> spectra(d.size());
  run.manifest().stage("reflectance map", [&] {
    SpectrumOptions opt = cfg.spectrum;
    opt.jobs = 1;
    parallel_for(d.size(), cfg.jobs,
                 [&](std::size_t i) { spectra[i] = cavity_spectrum(base, d[i], run.lib(), opt); });
  });
  Table map{{{"d_nm"}, {"lambda_nm"}, {"R"}}, {}};
  for (std::size_t i = 0; i < d.size(); ++i)
    for (Eigen::Index k = 0; k < spectra[i].wavelength.size(); ++k)
      map.add({d[i] / nm, label_nm(spectra[i].wavelength(k)), spectra[i].reflectance(k)});
  run.emit("reflectance", map);
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig2a", "fig2b", "fig3a", "fig3b",
                                            "fig4a", "fig4b", "fig5a", "fig5b"};
  return ids;
}

FigureOutput run_figure(const std::string& id, const ScenarioConfig& config) {
  config.validate();
  FigureRun run(id, config);
  try {
    if (id == "fig2a") fig2a(run);
    else if (id == "fig2b") fig2b(run);
    else if (id == "fig3a") fig3a(run);
    else if (id == "fig3b") fig3b(run);
    else if (id == "fig4a") fig4a(run);
    else if (id == "fig4b") fig4b(run);
    else if (id == "fig5a") fig5(run, 300 * nm);
    else if (id == "fig5b") fig5(run, 150 * nm);
    else {
      std::string known;
      for (const std::string& k : figure_ids()) known += (known.empty() ? "" : ", ") + k;
      throw ConfigError("unknown figure '" + id + "' (known: " + known + ")");
    }
  } catch (...) {
    run.manifest().add_error(current_message());
    try {
      run.finish();
    } catch (...) {
    }
    throw;
  }
  return run.finish();
}

}  // namespace casimir_fp
