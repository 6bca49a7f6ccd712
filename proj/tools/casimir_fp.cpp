// casimir_fp: command-line front end.
//
// Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include "casimir_fp/errors.hpp"
#include "casimir_fp/scenario.hpp"

using namespace casimir_fp;
namespace fs = std::filesystem;

namespace {

constexpr double nm = 1e-9;

struct Globals {
  std::optional<std::string> config;
  std::vector<std::string> set;
  std::optional<std::string> jobs, tol, out_dir, materials;
  std::optional<std::string> plate, gap, teflon, ito, silica, voltage, temperature, area;
  bool json = false;
  std::optional<std::string> dump_eps;
  bool dump_stack = false;
};

ScenarioConfig load_config(const Globals& g) {
  std::vector<std::pair<std::string, std::string>> flags;
  for (const std::string& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    flags.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto add = [&](const std::optional<std::string>& v, const char* key) {
    if (v) flags.emplace_back(key, *v);
  };
  add(g.plate, "geometry.plate");
  add(g.gap, "geometry.gap");
  add(g.teflon, "geometry.teflon");
  add(g.ito, "geometry.ito");
  add(g.silica, "geometry.silica");
  add(g.voltage, "gate.voltage");
  add(g.temperature, "temperature");
  add(g.area, "brownian.area");
  add(g.materials, "materials");
  add(g.tol, "numerics.rel_tol");
  add(g.jobs, "jobs");
  add(g.out_dir, "output.dir");
  if (g.json) flags.emplace_back("output.json", "true");
  std::optional<fs::path> file;
  if (g.config) file = *g.config;
  return parse_config(file, flags);
}

fs::path target(const ScenarioConfig& c, const std::optional<std::string>& output, const char* name) {
  return output ? fs::path(*output) : c.out_dir / name;
}

fs::path manifest_path(const fs::path& csv) {
  fs::path m = csv;
  m.replace_extension();
  m += "_manifest.json";
  return m;
}

void write_table(const Table& t, const fs::path& file, const ScenarioConfig& c, RunManifest& m) {
  emit_table(t, {file, c.json_mirror}, m.hash());
  m.add_output(file);
}

// Sweep grid in SI units; voltages may be written relative to V_b.
std::vector<double> sweep_grid(SweepAxis axis, const std::string& from, const std::string& to,
                               int points, const ScenarioConfig& c) {
  auto value = [&](const std::string& s) {
    switch (axis) {
      case SweepAxis::kVoltage: return parse_voltage(s).resolve(c.breakdown());
      case SweepAxis::kTemperature: return parse_quantity(s, Dimension::kTemperature);
      case SweepAxis::kSilicaThickness: return parse_quantity(s, Dimension::kLength);
    }
    return 0.0;
  };
  return linear_grid(value(from), value(to), points);
}

int report_errors(const std::vector<std::string>& errors, RunManifest& m) {
  for (const std::string& e : errors) {
    std::cerr << "warning: " << e << '\n';
    m.add_error(e);
  }
  return errors.empty() ? 0 : 3;
}

void dump_eps(const ScenarioConfig& c, const MaterialLibrary& lib, const std::string& freq) {
  const double omega = parse_quantity(freq, Dimension::kFrequency);
  const CavityGeometry g = c.resolved_geometry();
  const LayerStack s = full_cavity_stack(g, g.gap, lib);
  Table t{{{"region", CellKind::kInteger},
           {"material", CellKind::kText},
           {"thickness_nm"},
           {"eps_re"},
           {"eps_im"},
           {"eps_imag_axis"}},
          {}};
  const auto regions = s.regions();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const double th = (i == 0 || i + 1 == regions.size())
                          ? std::numeric_limits<double>::infinity()
                          : s.layers[i - 1].thickness / nm;
    const auto e = regions[i]->eps_real(omega);
    t.add({static_cast<std::int64_t>(i), regions[i]->name(), th, e.real(), e.imag(),
           regions[i]->eps_imag(omega)});
  }
  const fs::path file = c.out_dir / "eps_dump.csv";
  emit_table(t, {file, c.json_mirror}, fnv1a_hex(c.to_json().dump()));
  std::cerr << "wrote " << file.string() << '\n';
}

void dump_stack(const ScenarioConfig& c, const MaterialLibrary& lib) {
  const CavityGeometry g = c.resolved_geometry();
  const nlohmann::json doc{{"cavity", stack_to_json(full_cavity_stack(g, g.gap, lib))},
                           {"upper", stack_to_json(build_upper_stack(g, lib))},
                           {"lower", stack_to_json(build_lower_stack(g, lib))}};
  fs::create_directories(c.out_dir);
  const fs::path file = c.out_dir / "stack.json";
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
  out << doc.dump(2) << '\n';
  std::cerr << "wrote " << file.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir-suspended Fabry-Perot cavity: forces, equilibrium, optics, Brownian motion"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--set", g.set, "Override a configuration key, key=value (repeatable)");
  app.add_option("--jobs", g.jobs, "Parallel workers (0: one per hardware thread)");
  app.add_option("--tol", g.tol, "Relative tolerance of the Lifshitz quadrature");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  app.add_option("--materials", g.materials, "Material data file or directory");
  app.add_option("--plate", g.plate, "Gold plate thickness, e.g. 40nm");
  app.add_option("--gap", g.gap, "Gap used by spectrum and diagnostics, e.g. 85nm");
  app.add_option("--teflon", g.teflon, "Teflon thickness");
  app.add_option("--ito", g.ito, "ITO thickness");
  app.add_option("--silica", g.silica, "Silica thickness");
  app.add_option("--voltage", g.voltage, "Gate voltage, e.g. 225V or 0.5Vb");
  app.add_option("--temperature", g.temperature, "Temperature, e.g. 300K");
  app.add_option("--area", g.area, "Plate area, e.g. 20x20um");
  app.add_flag("--json", g.json, "Also write a JSON mirror of every table");
  app.add_option("--dump-eps", g.dump_eps, "Write per-region permittivity at this frequency")
      ->type_name("FREQ");
  app.add_flag("--dump-stack", g.dump_stack, "Write the layer stacks as JSON");

  std::optional<std::string> output;
  auto* pressure = app.add_subcommand("pressure", "Casimir pressure and energy versus separation");
  std::string d_min = "40nm", d_max = "200nm";
  int points = 161;
  pressure->add_option("--d-min", d_min, "Smallest separation")->capture_default_str();
  pressure->add_option("--d-max", d_max, "Largest separation")->capture_default_str();
  pressure->add_option("--points", points, "Grid points")->capture_default_str();
  pressure->add_option("-o,--output", output, "Output CSV");

  auto* equilibrium = app.add_subcommand("equilibrium", "Equilibrium separation, optionally swept");
  std::optional<std::string> axis;
  std::string from, to;
  int sweep_points = 11;
  for (auto* sub : {equilibrium}) {
    sub->add_option("--sweep", axis, "voltage, temperature or silica");
    sub->add_option("--from", from, "First sweep value, with unit");
    sub->add_option("--to", to, "Last sweep value, with unit");
    sub->add_option("--points", sweep_points, "Sweep nodes")->capture_default_str();
    sub->add_option("-o,--output", output, "Output CSV");
  }

  auto* spectrum = app.add_subcommand("spectrum", "Normal-incidence reflectance spectrum");
  bool at_equilibrium = false;
  spectrum->add_flag("--at-equilibrium", at_equilibrium, "Use the equilibrium separation as the gap");
  spectrum->add_option("-o,--output", output, "Output CSV");

  auto* sweep = app.add_subcommand("resonance-sweep", "Resonant wavelength at equilibrium versus a stimulus");
  sweep->add_option("--sweep", axis, "voltage, temperature or silica")->required();
  sweep->add_option("--from", from, "First sweep value, with unit")->required();
  sweep->add_option("--to", to, "Last sweep value, with unit")->required();
  sweep->add_option("--points", sweep_points, "Sweep nodes")->capture_default_str();
  sweep->add_option("-o,--output", output, "Output CSV");

  auto* brownian = app.add_subcommand("brownian", "Position distribution of the suspended plate");
  brownian->add_option("-o,--output", output, "Output CSV for the density");

  auto* figure = app.add_subcommand("figure", "Data behind one figure");
  std::string figure_id;
  figure->add_option("id", figure_id, "fig2a, fig2b, fig3a, fig3b, fig4a, fig4b, fig5a or fig5b")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ScenarioConfig config = load_config(g);
    const MaterialLibrary lib = config.load_materials();
    if (g.dump_eps) dump_eps(config, lib, *g.dump_eps);
    if (g.dump_stack) dump_stack(config, lib);

    auto command = [&] {
      std::string s;
      for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
      return s;
    }();

    if (*pressure) {
      RunManifest m(command, config, lib);
      const double lo = parse_quantity(d_min, Dimension::kLength);
      const double hi = parse_quantity(d_max, Dimension::kLength);
      const Table t = m.stage("pressure", [&] { return pressure_table(config, lib, lo, hi, points); });
      const fs::path file = target(config, output, "pressure.csv");
      write_table(t, file, config, m);
      m.write(manifest_path(file));
      return 0;
    }
    if (*equilibrium) {
      RunManifest m(command, config, lib);
      SweepAxis ax = SweepAxis::kVoltage;
      std::vector<double> grid;
      if (axis) {
        if (from.empty() || to.empty()) throw ConfigError("--sweep needs --from and --to");
        ax = parse_axis(*axis);
        grid = sweep_grid(ax, from, to, sweep_points, config);
      } else {
        grid = {config.resolved_geometry().voltage};
      }
      std::vector<std::string> errors;
      const Table t = m.stage("equilibrium", [&] { return equilibrium_table(config, lib, ax, grid, &errors); });
      const fs::path file = target(config, output, "equilibrium.csv");
      write_table(t, file, config, m);
      const int rc = report_errors(errors, m);
      m.write(manifest_path(file));
      if (!axis && rc == 0) {
        const Row& r = t.rows.front();
        std::cout << "d_e = " << format_real(std::get<double>(r[1])) << " nm"
                  << (std::get<std::int64_t>(r[3]) ? " (stable)" : " (unstable)")
                  << ", zero crossing = " << format_real(std::get<double>(r[2])) << " nm\n";
      }
      return rc;
    }
    if (*spectrum) {
      RunManifest m(command, config, lib);
      double d = config.geometry.gap;
      if (at_equilibrium)
        d = m.stage("equilibrium", [&] {
          return solve_equilibrium(config.resolved_geometry(), lib, config.equilibrium_settings()).d_e;
        });
      const Table t = m.stage("spectrum", [&] { return spectrum_table(config, lib, d); });
      const fs::path file = target(config, output, "spectrum.csv");
      write_table(t, file, config, m);
      try {
        const Resonance r = m.stage("resonance", [&] {
          return detect_resonance(config.resolved_geometry(), d, lib, config.spectrum, config.resonance,
                                  config.readout_step, config.reflectance_band);
        });
        std::cout << "d = " << format_real(d / nm) << " nm: resonance at "
                  << format_real(r.lambda_res / nm) << " nm, Q = " << format_real(r.q_factor) << '\n';
      } catch (const ResonanceNotDetectable& e) {
        std::cout << "d = " << format_real(d / nm) << " nm: " << e.what() << '\n';
        m.add_error(e.what());
      }
      m.write(manifest_path(file));
      return 0;
    }
    if (*sweep) {
      RunManifest m(command, config, lib);
      const SweepAxis ax = parse_axis(*axis);
      const std::vector<double> grid = sweep_grid(ax, from, to, sweep_points, config);
      std::vector<std::string> errors;
      const Table t = m.stage("resonance sweep", [&] { return resonance_table(config, lib, ax, grid, &errors); });
      const fs::path file = target(config, output, "resonance_sweep.csv");
      write_table(t, file, config, m);
      const int rc = report_errors(errors, m);
      m.write(manifest_path(file));
      return rc;
    }
    if (*brownian) {
      RunManifest m(command, config, lib);
      const BrownianTables t = m.stage("brownian", [&] { return brownian_tables(config, lib); });
      const fs::path file = target(config, output, "brownian.csv");
      fs::path summary = file;
      summary.replace_extension();
      summary += "_summary.csv";
      write_table(t.density, file, config, m);
      write_table(t.summary, summary, config, m);
      m.write(manifest_path(file));
      const Row& r = t.summary.rows.front();
      std::cout << "mean = " << format_real(std::get<double>(r[0])) << " nm, d_e = "
                << format_real(std::get<double>(r[1])) << " nm, offset = "
                << format_real(std::get<double>(r[2])) << " nm, peak = "
                << format_real(std::get<double>(r[3])) << " /nm\n";
      return 0;
    }
    if (*figure) {
      const FigureOutput out = run_figure(figure_id, config);
      for (const fs::path& f : out.files) std::cout << f.string() << '\n';
      std::cout << out.manifest.string() << '\n';
      return 0;
    }
    if (!g.dump_eps && !g.dump_stack) {
      std::cerr << app.help();
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    if (e.partial_estimate() != 0.0 || e.error_estimate() != 0.0)
      std::cerr << "  partial estimate " << e.partial_estimate() << ", error estimate "
                << e.error_estimate() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
