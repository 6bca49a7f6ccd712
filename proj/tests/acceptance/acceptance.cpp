// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion was evaluated, whatever its
// verdict; with --strict it is the number of failing criteria.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "casimir_fp/brownian.hpp"
#include "casimir_fp/errors.hpp"
#include "casimir_fp/optics.hpp"
#include "casimir_fp/scenario.hpp"

using namespace casimir_fp;
namespace fs = std::filesystem;

namespace {

constexpr double nm = 1e-9;

const MaterialLibrary& lib() {
  static const MaterialLibrary l = MaterialLibrary::defaults();
  return l;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

MaterialRef constant(double eps) {
  return std::make_shared<const DielectricModel>("constant", ConstantPermittivity{eps});
}

// Collects sub-checks of one criterion with a short note for each.
class Verdict {
 public:
  void check(bool ok, const std::string& note) {
    ok_ = ok_ && ok;
    if (!notes_.empty()) notes_ += "; ";
    notes_ += (ok ? "" : "FAILED ") + note;
  }
  bool ok() const { return ok_; }
  const std::string& notes() const { return notes_; }

 private:
  bool ok_ = true;
  std::string notes_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double omega_of(double lambda) { return 2 * oracle::pi * oracle::c / lambda; }

LifshitzSolver cavity_solver(const CavityGeometry& g, QuadratureSpec q = {}) {
  return LifshitzSolver(build_upper_stack(g, lib()), build_lower_stack(g, lib()), g.temperature, q);
}

double d_e(const CavityGeometry& g) { return solve_equilibrium(g, lib()).d_e; }

// ---------------------------------------------------------------------------

void accumulation_layer(Verdict& v) {
  const double la = accumulation_thickness(1e25, 300.0, lib().ito().static_permittivity);
  v.check(std::abs(la - 2.56 * nm) <= 0.01 * nm, fmt("L_a = %.4f nm", la / nm));
}

void breakdown(Verdict& v) {
  v.check(breakdown_voltage(150 * nm) == 450.0, fmt("V_b(150 nm) = %.17g V", breakdown_voltage(150 * nm)));
  v.check(breakdown_voltage(300 * nm) == 900.0, fmt("V_b(300 nm) = %.17g V", breakdown_voltage(300 * nm)));
}

void load_pressure(Verdict& v) {
  const double p = gb_pressure(BodyForces{});
  v.check(rel(p, 0.007) <= 0.05, fmt("load = %.6g Pa", p));
}

void ideal_mirror(Verdict& v) {
  const LayerStack mirror{constant(1.0), {}, constant(1e12)};
  const LifshitzSolver s(mirror, mirror, 0.1, {}, 50 * nm);
  for (double d : {50 * nm, 100 * nm, 200 * nm}) {
    const double p = s.pressure(d);
    const double e = rel(p, oracle::ideal_pressure(d));
    v.check(e <= 0.01, fmt("d = %.0f nm: rel err %.2e", d / nm, e));
  }
}

void energy_pressure(Verdict& v) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dd(30 * nm, 300 * nm), vv(0.0, 450.0), tt(300.0, 400.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    CavityGeometry g;
    const double d = dd(rng);
    g.voltage = vv(rng);
    g.temperature = tt(rng);
    const LifshitzSolver s = cavity_solver(g);
    const double h = 1e-4 * d;
    const double fd = (s.energy_per_area(d - h) - s.energy_per_area(d + h)) / (2 * h);
    const double p = s.pressure(d);
    const double e = std::abs(fd - p) / std::max(std::abs(p), std::abs(fd));
    worst = std::max(worst, e);
    if (e > 1e-4)
      v.check(false, fmt("d = %.1f nm, V = %.0f V, T = %.0f K", d / nm, g.voltage, g.temperature) +
                         fmt(": rel diff %.2e", e));
  }
  v.check(worst <= 1e-4, fmt("worst rel diff over 10 points %.2e", worst));
}

void kramers_kronig(Verdict& v) {
  const double wp = 9.0 * oracle::eV, g = 0.035 * oracle::eV;
  auto im = [&](double x) { return oracle::drude_absorption(wp, g, x); };
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double xi = 0.01 * oracle::eV * std::pow(1e4, i / 19.0);
    worst = std::max(worst, rel(kk_transform(im, xi), oracle::drude_imag_axis(wp, g, xi)));
  }
  v.check(worst <= 1e-4, fmt("worst rel err over 20 frequencies %.2e", worst));
}

void transfer_matrix(Verdict& v) {
  {
    const LayerStack s{constant(1.0), {}, constant(2.0)};
    const double te = reflection_imag_freq(s, 1e15, 0.0, Polarization::TE);
    const double want = (1 - std::sqrt(2.0)) / (1 + std::sqrt(2.0));
    v.check(rel(te, want) < 1e-13, fmt("Fresnel r_TE %.6f", te));
  }
  {
    const double e1 = 1.8, e2 = 4.5, xi = 2e15, k = 1.3e7, L = 20 * nm;
    const double K1 = std::sqrt(k * k + e1 * xi * xi / (oracle::c * oracle::c));
    const double K2 = std::sqrt(k * k + e2 * xi * xi / (oracle::c * oracle::c));
    const double r12 = (e2 * K1 - e1 * K2) / (e2 * K1 + e1 * K2);
    const LayerStack s{constant(e1), {{constant(e2), L}}, constant(e1)};
    const double e = rel(reflection_imag_freq(s, xi, k, Polarization::TM), oracle::slab(r12, K2, L));
    v.check(e < 1e-12, fmt("slab rel err %.1e", e));
  }
  {
    double worst = 0.0;
    for (const MaterialRef& m : {lib().gold(), lib().silica(), lib().teflon(), lib().ito_layer(1e25)}) {
      const LayerStack whole{lib().glycerol(), {{m, 40 * nm}, {lib().silica(), 100 * nm}}, lib().gold()};
      const LayerStack split{lib().glycerol(), {{m, 15 * nm}, {m, 25 * nm}, {lib().silica(), 100 * nm}},
                             lib().gold()};
      for (Polarization pol : {Polarization::TE, Polarization::TM}) {
        const double a = reflection_imag_freq(whole, 3e15, 2e7, pol);
        worst = std::max(worst, rel(reflection_imag_freq(split, 3e15, 2e7, pol), a));
      }
      const auto a = reflection_real_freq(whole, omega_of(650 * nm));
      worst = std::max(worst, std::abs(reflection_real_freq(split, omega_of(650 * nm)) - a) / std::abs(a));
    }
    v.check(worst <= 1e-12, fmt("layer merge rel diff %.1e", worst));
  }
  {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> eps(1.0, 9.0), thick(1 * nm, 400 * nm), lambda(300 * nm, 1500 * nm);
    std::uniform_int_distribution<int> count(0, 8);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      LayerStack s{constant(eps(rng)), {}, constant(eps(rng))};
      const int n = count(rng);
      for (int i = 0; i < n; ++i) s.layers.push_back({constant(eps(rng)), thick(rng)});
      const double w = omega_of(lambda(rng));
      for (Polarization pol : {Polarization::TE, Polarization::TM}) {
        const RealFrequencyResponse r = response_real_freq(s, w, pol);
        worst = std::max(worst, std::abs(r.reflectance + r.transmittance - 1.0));
      }
    }
    v.check(worst <= 1e-9, fmt("|R + T - 1| <= %.1e on 100 stacks", worst));
  }
}

void voltage_equilibrium(Verdict& v) {
  const std::vector<double> grid{0.0, 90.0, 180.0, 270.0, 360.0, 450.0};
  const EquilibriumSweep s = sweep_equilibrium(SweepAxis::kVoltage, grid, CavityGeometry{}, lib(), {}, jobs());
  if (!s.nodes.front().point || !s.nodes.back().point) {
    v.check(false, "sweep end point failed");
    return;
  }
  const double d0 = s.nodes.front().point->d_e, d1 = s.nodes.back().point->d_e;
  v.check(std::abs(d0 - 85 * nm) <= 15 * nm, fmt("d_e(0 V) = %.2f nm", d0 / nm));
  v.check(s.trend.direction == -1 && s.trend.monotone && s.trend.failed_nodes == 0,
          "monotone decrease over 6 voltages");
  const double shift = d0 - d1;
  v.check(shift >= 9 * nm && shift <= 27 * nm, fmt("shift at V_b = %.2f nm", shift / nm));
}

void temperature_equilibrium(Verdict& v) {
  const std::vector<double> grid{300.0, 325.0, 350.0, 375.0, 400.0};
  const EquilibriumSweep s =
      sweep_equilibrium(SweepAxis::kTemperature, grid, CavityGeometry{}, lib(), {}, jobs());
  v.check(s.trend.direction == 1 && s.trend.monotone && s.trend.failed_nodes == 0,
          "monotone increase over 5 temperatures");
  const double change = s.trend.total_change;
  v.check(change >= 5 * nm && change <= 15 * nm, fmt("300 to 400 K: %+.2f nm", change / nm));
  v.check(s.trend.linearity_deviation <= 0.1,
          fmt("max deviation from a line %.1f%% of the change", 100 * s.trend.linearity_deviation));
}

void thick_silica(Verdict& v) {
  CavityGeometry g;
  g.silica_thickness = 300 * nm;
  const double a = d_e(g);
  g.voltage = breakdown_voltage(g.silica_thickness);
  const double b = d_e(g);
  const double shift = a - b;
  v.check(shift >= 18 * nm && shift <= 54 * nm,
          fmt("d_e = %.2f nm at 0 V, %.2f nm at V_b: %.2f nm", a / nm, b / nm, shift / nm));
}

void resonance(Verdict& v) {
  const CavityGeometry g;
  const double d = d_e(g);
  const double l = detect_resonance(g, d, lib()).lambda_res;
  v.check(std::abs(l - 810 * nm) <= 60 * nm, fmt("dip at d_e = %.2f nm: %.1f nm", d / nm, l / nm));

  const StimulusSweep sv = resonance_vs_stimulus(SweepAxis::kVoltage, {0.0, 225.0, 450.0}, g, lib(), {}, jobs());
  const StimulusSweep st = resonance_vs_stimulus(SweepAxis::kTemperature, {300.0, 350.0, 400.0}, g, lib(), {}, jobs());
  auto shifts = [](const StimulusSweep& s, int sign) {
    bool ok = true;
    for (std::size_t i = 1; i < s.rows.size(); ++i)
      ok = ok && s.rows[i].delta_lambda && s.rows[i - 1].delta_lambda &&
           sign * (*s.rows[i].delta_lambda - *s.rows[i - 1].delta_lambda) > 0;
    return ok && s.rows.back().delta_lambda && sign * *s.rows.back().delta_lambda >= 15 * nm;
  };
  const double dv = sv.rows.back().delta_lambda.value_or(NAN);
  const double dt = st.rows.back().delta_lambda.value_or(NAN);
  v.check(shifts(sv, -1), fmt("voltage shift %+.1f nm", dv / nm));
  v.check(shifts(st, +1), fmt("temperature shift %+.1f nm", dt / nm));

  CavityGeometry thin;
  thin.silica_thickness = 50 * nm;
  try {
    detect_resonance(thin, d_e(thin), lib());
    v.check(false, "L_s = 50 nm reported a detectable resonance");
  } catch (const ResonanceNotDetectable&) {
    v.check(true, "L_s = 50 nm: resonance not detectable");
  }
}

void brownian(Verdict& v) {
  const std::vector<Scenario> sc{{0.0, 300.0, 150 * nm, "150nm"}, {0.0, 300.0, 300 * nm, "300nm"}};
  const Comparison c = compare_distributions(sc, CavityGeometry{}, lib(), 400e-12, {}, jobs());
  for (const ScenarioSummary& s : c.summaries) {
    if (!s.distribution) {
      v.check(false, s.scenario.label + ": " + s.error);
      return;
    }
    const PositionDistribution& p = *s.distribution;
    v.check(std::abs(p.normalization - 1.0) <= 1e-6,
            s.scenario.label + fmt(": normalization 1%+.1e", p.normalization - 1.0));
    v.check(std::abs(p.offset) < 1 * nm, s.scenario.label + fmt(": offset %.3f nm", p.offset / nm));
  }
  const double ratio = c.summaries[0].distribution->peak_density / c.summaries[1].distribution->peak_density;
  v.check(ratio >= 1.5 && ratio <= 2.5, fmt("peak ratio 150/300 nm = %.2f", ratio));
}

void properties(Verdict& v) {
  {
    struct Case {
      MaterialRef gap, body;
    };
    bool ok = true;
    for (const Case c : {Case{constant(1.0), lib().gold()}, Case{lib().glycerol(), lib().gold()},
                         Case{lib().glycerol(), lib().silica()}, Case{constant(1.0), lib().teflon()}}) {
      const LifshitzSolver s({c.gap, {{c.body, 40 * nm}}, c.gap}, {c.gap, {}, c.body}, 300.0);
      for (double d : {10 * nm, 30 * nm, 85 * nm, 200 * nm, 600 * nm, 2000 * nm}) ok = ok && s.pressure(d) < 0;
    }
    v.check(ok, "like materials attract at 6 separations, 4 pairs");
  }
  {
    const EquilibriumSweep s = sweep_equilibrium(SweepAxis::kSilicaThickness, {100 * nm, 150 * nm, 200 * nm, 250 * nm},
                                                 CavityGeometry{}, lib(), {}, jobs());
    v.check(s.trend.direction == 1 && s.trend.monotone, "d_e rises with silica thickness");
    double prev = 0.0;
    bool ok = true;
    for (double d : {75 * nm, 80 * nm, 85 * nm, 90 * nm, 95 * nm}) {
      const double l = find_resonance(cavity_spectrum(CavityGeometry{}, d, lib())).deepest.lambda_res;
      ok = ok && l > prev;
      prev = l;
    }
    v.check(ok, "dip red-shifts as the gap opens");
  }
  {
    struct Point {
      double V, T, d;
    };
    double worst = 0.0;
    for (const Point p : {Point{0, 300, 40 * nm}, Point{200, 300, 70 * nm}, Point{450, 300, 120 * nm},
                          Point{0, 400, 90 * nm}, Point{300, 350, 300 * nm}}) {
      CavityGeometry g;
      g.voltage = p.V;
      g.temperature = p.T;
      const CasimirResult a = cavity_solver(g).evaluate(p.d);
      const CasimirResult b = cavity_solver(g, QuadratureSpec{}.doubled()).evaluate(p.d);
      worst = std::max(worst, std::abs(a.pressure - b.pressure) / a.pressure_abs_error);
    }
    v.check(worst < 1.0, fmt("doubled cutoffs: |change| / error <= %.2f", worst));
  }
}

std::string csv_bodies(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const fs::path& f : files) {
    std::ifstream in(f);
    std::string line;
    all += f.filename().string() + "\n";
    while (std::getline(in, line))
      if (line.empty() || line[0] != '#') all += line + "\n";
  }
  return all;
}

void determinism(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "casimir_fp_acceptance";
  fs::remove_all(root);
  std::string bodies[2];
  for (int run = 0; run < 2; ++run) {
    ScenarioConfig c;
    c.out_dir = root / std::to_string(run);
    c.jobs = run == 0 ? 1 : jobs();
    run_figure("fig2a", c);
    bodies[run] = csv_bodies(c.out_dir);
  }
  fs::remove_all(root);
  v.check(!bodies[0].empty() && bodies[0] == bodies[1],
          fmt("%.0f bytes of CSV identical across runs with 1 and several threads", double(bodies[0].size())));
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<Criterion> criteria{
      {1, "accumulation layer thickness", accumulation_layer},
      {2, "breakdown voltage", breakdown},
      {3, "load pressure", load_pressure},
      {4, "ideal-mirror limit", ideal_mirror},
      {5, "energy-pressure consistency", energy_pressure},
      {6, "Kramers-Kronig Drude pair", kramers_kronig},
      {7, "transfer-matrix identities", transfer_matrix},
      {8, "equilibrium and its voltage shift", voltage_equilibrium},
      {9, "equilibrium versus temperature", temperature_equilibrium},
      {10, "voltage shift with 300 nm silica", thick_silica},
      {11, "resonance position, tuning and detectability", resonance},
      {12, "Brownian distribution", brownian},
      {13, "physical and numerical properties", properties},
      {14, "figure determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += v.ok() ? 0 : 1;
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", c.id, v.ok() ? "PASS" : "FAIL", c.title,
                v.notes().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d passed, %d failed\n", criteria.size(), int(criteria.size()) - failed, failed);
  return strict ? failed : 0;
}
