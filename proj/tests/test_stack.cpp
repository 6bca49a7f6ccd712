#include <doctest.h>

#include <random>

#include "casimir_fp/errors.hpp"
#include "casimir_fp/stack.hpp"
#include "oracles.hpp"

using namespace casimir_fp;

namespace {

MaterialRef constant(double eps) {
  return std::make_shared<const DielectricModel>("constant", ConstantPermittivity{eps});
}

const MaterialLibrary& lib() {
  static const MaterialLibrary l = MaterialLibrary::defaults();
  return l;
}

double omega_of(double lambda) { return 2 * oracle::pi * oracle::c / lambda; }

}  // namespace

TEST_CASE("no contrast, no reflection") {
  const MaterialRef m = constant(2.5);
  const LayerStack s{m, {{m, 10e-9}, {m, 30e-9}}, m};
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    CHECK(reflection_imag_freq(s, 1e15, 3e7, pol) == 0.0);
    CHECK(std::abs(reflection_real_freq(s, omega_of(600e-9), pol)) == 0.0);
  }
  const LayerStack bare{m, {}, m};
  CHECK(reflection_imag_freq(bare, 1e15, 0.0, Polarization::TM) == 0.0);
}

TEST_CASE("single interface at normal incidence on the imaginary axis") {
  const LayerStack s{constant(1.0), {}, constant(2.0)};
  const double r_te = reflection_imag_freq(s, 1e15, 0.0, Polarization::TE);
  const double r_tm = reflection_imag_freq(s, 1e15, 0.0, Polarization::TM);
  CHECK(r_te == doctest::Approx((1 - std::sqrt(2.0)) / (1 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(r_tm == doctest::Approx((2 - std::sqrt(2.0)) / (2 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(r_te == doctest::Approx(-0.1716).epsilon(1e-3));
  CHECK(r_tm == doctest::Approx(0.1716).epsilon(1e-3));
}

TEST_CASE("slab between identical half-spaces") {
  const double e1 = 1.8, e2 = 4.5, xi = 2e15, k = 1.3e7;
  const double K1 = std::sqrt(k * k + e1 * xi * xi / (oracle::c * oracle::c));
  const double K2 = std::sqrt(k * k + e2 * xi * xi / (oracle::c * oracle::c));
  const double r12_te = (K1 - K2) / (K1 + K2);
  const double r12_tm = (e2 * K1 - e1 * K2) / (e2 * K1 + e1 * K2);
  for (double L : {1e-9, 20e-9, 150e-9}) {
    const LayerStack s{constant(e1), {{constant(e2), L}}, constant(e1)};
    CAPTURE(L);
    CHECK(reflection_imag_freq(s, xi, k, Polarization::TE) ==
          doctest::Approx(oracle::slab(r12_te, K2, L)).epsilon(1e-13));
    CHECK(reflection_imag_freq(s, xi, k, Polarization::TM) ==
          doctest::Approx(oracle::slab(r12_tm, K2, L)).epsilon(1e-13));
  }
  const LayerStack thin{constant(e1), {{constant(e2), 1e-15}}, constant(e1)};
  CHECK(std::abs(reflection_imag_freq(thin, xi, k, Polarization::TE)) < 1e-6);
  const LayerStack thick{constant(e1), {{constant(e2), 1e-3}}, constant(e1)};
  CHECK(reflection_imag_freq(thick, xi, k, Polarization::TM) == doctest::Approx(r12_tm).epsilon(1e-14));
}

TEST_CASE("lossless film against the Airy formula") {
  const double n1 = 1.0, n2 = 2.1, n3 = 1.5, lambda = 700e-9;
  for (double L : {lambda / (4 * n2), lambda / (2 * n2), 37e-9, 410e-9}) {
    const LayerStack s{constant(n1 * n1), {{constant(n2 * n2), L}}, constant(n3 * n3)};
    CAPTURE(L);
    CHECK(std::abs(response_real_freq(s, omega_of(lambda)).reflectance -
                   oracle::airy_reflectance(n1, n2, n3, L, lambda)) < 1e-8);
  }
}

TEST_CASE("thick gold mirror reflects most light at 810 nm") {
  const LayerStack s{constant(1.0), {}, lib().gold()};
  CHECK(response_real_freq(s, omega_of(810e-9)).reflectance > 0.9);
}

TEST_CASE("splitting a layer in two changes nothing") {
  const std::vector<MaterialRef> mats{lib().gold(), lib().silica(), lib().teflon(), lib().ito_layer(1e25)};
  for (const MaterialRef& m : mats) {
    CAPTURE(m->name());
    const LayerStack whole{lib().glycerol(), {{m, 40e-9}, {lib().silica(), 100e-9}}, lib().gold()};
    const LayerStack split{lib().glycerol(), {{m, 15e-9}, {m, 25e-9}, {lib().silica(), 100e-9}}, lib().gold()};
    for (Polarization pol : {Polarization::TE, Polarization::TM}) {
      const double a = reflection_imag_freq(whole, 3e15, 2e7, pol);
      const double b = reflection_imag_freq(split, 3e15, 2e7, pol);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
    const auto a = reflection_real_freq(whole, omega_of(650e-9));
    const auto b = reflection_real_freq(split, omega_of(650e-9));
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("lossless stacks conserve energy") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> eps(1.0, 9.0), thick(1e-9, 400e-9), lambda(300e-9, 1500e-9);
  std::uniform_int_distribution<int> count(0, 8);
  for (int trial = 0; trial < 100; ++trial) {
    LayerStack s{constant(eps(rng)), {}, constant(eps(rng))};
    const int n = count(rng);
    for (int i = 0; i < n; ++i) s.layers.push_back({constant(eps(rng)), thick(rng)});
    const double w = omega_of(lambda(rng));
    for (Polarization pol : {Polarization::TE, Polarization::TM}) {
      const RealFrequencyResponse r = response_real_freq(s, w, pol);
      CAPTURE(trial);
      CHECK(std::abs(r.reflectance + r.transmittance - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("lower stack follows the gate state") {
  CavityGeometry g;
  const LayerStack zero = build_lower_stack(g, lib());
  CHECK(zero.region_count() == 5);
  CHECK(zero.layers[1].thickness == g.ito_thickness);

  g.voltage = 450.0;
  const GateState gate = resolve_gate(g, lib());
  CHECK(gate.accumulation_thickness == doctest::Approx(2.56e-9).epsilon(4e-3));
  CHECK(gate.accumulation_density == doctest::Approx(2.6e26).epsilon(0.03));
  const LayerStack biased = build_lower_stack(g, gate, lib());
  REQUIRE(biased.region_count() == 6);
  // Background next to Teflon, accumulation next to silica.
  CHECK(biased.layers[1].thickness + biased.layers[2].thickness == doctest::Approx(g.ito_thickness));
  CHECK(biased.layers[2].thickness == gate.accumulation_thickness);
  CHECK(biased.layers[2].material->eps_imag(1e14) > biased.layers[1].material->eps_imag(1e14));

  g.placement = AccumulationPlacement::kAdjacentToTeflon;
  CHECK(build_lower_stack(g, gate, lib()).layers[1].thickness == gate.accumulation_thickness);

  g.voltage = 500.0;
  CHECK_THROWS_AS(build_lower_stack(g, lib()), BreakdownError);
}

TEST_CASE("upper stack is the gold plate in glycerol") {
  const CavityGeometry g;
  const LayerStack up = build_upper_stack(g, lib());
  REQUIRE(up.layers.size() == 1);
  CHECK(up.layers[0].thickness == 40e-9);
  CHECK(up.layers[0].material == lib().gold());
  CHECK(up.incident == lib().glycerol());
  CHECK(up.exit == lib().glycerol());

  const LayerStack bulk{lib().glycerol(), {}, lib().gold()};
  const double xi = 1e15, k = 1e7;
  CavityGeometry thick = g;
  thick.plate_thickness = 1e-3;
  CavityGeometry thin = g;
  thin.plate_thickness = 1e-14;
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    CHECK(reflection_imag_freq(build_upper_stack(thick, lib()), xi, k, pol) ==
          doctest::Approx(reflection_imag_freq(bulk, xi, k, pol)).epsilon(1e-12));
    CHECK(std::abs(reflection_imag_freq(build_upper_stack(thin, lib()), xi, k, pol)) < 1e-3);
  }
}

TEST_CASE("stack JSON round trip") {
  CavityGeometry g;
  g.voltage = 300.0;
  const LayerStack s = build_lower_stack(g, lib());
  const LayerStack back = stack_from_json(stack_to_json(s), lib());
  REQUIRE(back.layers.size() == s.layers.size());
  for (Polarization pol : {Polarization::TE, Polarization::TM})
    CHECK(reflection_imag_freq(back, 2e15, 1e7, pol) ==
          doctest::Approx(reflection_imag_freq(s, 2e15, 1e7, pol)).epsilon(1e-12));
}

TEST_CASE("invalid stacks are rejected") {
  LayerStack s{constant(1.0), {{constant(2.0), -1e-9}}, constant(1.0)};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.layers[0].material = nullptr;
  s.layers[0].thickness = 1e-9;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CavityGeometry g;
  g.silica_thickness = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}
