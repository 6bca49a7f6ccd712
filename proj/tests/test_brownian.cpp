#include <doctest.h>

#include <cmath>

#include "casimir_fp/brownian.hpp"
#include "casimir_fp/errors.hpp"
#include "oracles.hpp"

using namespace casimir_fp;

namespace {

const MaterialLibrary& lib() {
  static const MaterialLibrary l = MaterialLibrary::defaults();
  return l;
}

// Harmonic well on a grid that is exactly symmetric in binary: centre and
// step are powers of two.
PotentialProfile harmonic(double k, double T, int half_points = 400) {
  const double d0 = std::ldexp(1.0, -23), h = std::ldexp(1.0, -33);
  const int n = 2 * half_points + 1;
  PotentialProfile p;
  p.d.resize(n);
  for (int i = 0; i < n; ++i) p.d(i) = d0 + (i - half_points) * h;
  p.U = p.d.unaryExpr([&](double x) { return 0.5 * k * (x - d0) * (x - d0); });
  p.temperature = T;
  p.area = 1.0;
  return p;
}

double stiffness_for(double sigma, double T) { return oracle::kB * T / (sigma * sigma); }

}  // namespace

TEST_CASE("harmonic well gives the Gaussian moments") {
  const double T = 300.0, sigma = 2e-9;
  const PotentialProfile p = harmonic(stiffness_for(sigma, T), T);
  const PositionDistribution r = position_distribution(p);
  const double d0 = std::ldexp(1.0, -23);
  CHECK(r.normalization == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.mean == d0);
  CHECK(r.offset == 0.0);
  CHECK(r.variance == doctest::Approx(sigma * sigma).epsilon(1e-4));
  CHECK(r.peak_position == doctest::Approx(d0).epsilon(1e-12));
  CHECK(r.peak_density == doctest::Approx(1.0 / std::sqrt(2 * oracle::pi * sigma * sigma)).epsilon(1e-4));
}

TEST_CASE("peak density scales with sqrt(k / T)") {
  const double k = stiffness_for(2e-9, 300.0);
  const double base = position_distribution(harmonic(k, 300.0)).peak_density;
  CHECK(position_distribution(harmonic(2 * k, 300.0)).peak_density / base ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(position_distribution(harmonic(k, 400.0)).peak_density / base ==
        doctest::Approx(std::sqrt(300.0 / 400.0)).epsilon(1e-6));
}

TEST_CASE("grid too narrow for the density") {
  const PotentialProfile wide = harmonic(stiffness_for(20e-9, 300.0), 300.0);
  CHECK_THROWS_AS(position_distribution(wide), NumericalError);
  PotentialProfile ramp = harmonic(0.0, 300.0);
  ramp.U = -1e-19 * Eigen::ArrayXd::LinSpaced(ramp.d.size(), 0.0, 1.0);
  CHECK_THROWS_AS(position_distribution(ramp), NumericalError);
}

TEST_CASE("identical distributions overlap completely") {
  const PositionDistribution a = position_distribution(harmonic(stiffness_for(2e-9, 300.0), 300.0));
  CHECK(overlap_integral(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  const PositionDistribution b = position_distribution(harmonic(stiffness_for(1e-9, 300.0), 300.0));
  const double o = overlap_integral(a, b);
  CHECK(o > 0.5);
  CHECK(o < 1.0);
  CHECK(o == doctest::Approx(overlap_integral(b, a)).epsilon(1e-12));
}

TEST_CASE("trap potential of the default cavity") {
  const CavityGeometry g;
  const double area = 400e-12;
  const PotentialProfile p = potential_profile(g, lib(), area);
  REQUIRE(p.equilibrium);
  Eigen::Index imin = 0;
  p.U.minCoeff(&imin);
  const double step = std::max(p.d(imin + 1) - p.d(imin), p.d(imin) - p.d(imin - 1));
  CHECK(std::abs(p.d(imin) - *p.equilibrium) <= step);
  CHECK(p.d(0) == doctest::Approx(5e-9));

  const PositionDistribution small = position_distribution(p);
  CHECK(small.normalization == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(small.offset) < 1e-9);
  // Fluctuations shrink with plate area: variance ~ 1 / A.
  const PositionDistribution large = position_distribution(potential_profile(g, lib(), 4 * area));
  CHECK(small.variance / large.variance == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("distribution responds to voltage and temperature") {
  const std::vector<Scenario> scenarios{{0.0, 300.0, 150e-9, "0V"},
                                        {225.0, 300.0, 150e-9, "Vb/2"},
                                        {450.0, 300.0, 150e-9, "Vb"},
                                        {0.0, 350.0, 150e-9, "350K"},
                                        {0.0, 400.0, 150e-9, "400K"}};
  const Comparison c = compare_distributions(scenarios, CavityGeometry{}, lib(), 400e-12, {}, 5);
  for (const ScenarioSummary& s : c.summaries) {
    CAPTURE(s.scenario.label);
    REQUIRE(s.distribution);
  }
  auto peak = [&](int i) { return c.summaries[i].distribution->peak_density; };
  CHECK(peak(1) > peak(0));
  CHECK(peak(2) > peak(1));
  CHECK(peak(3) < peak(0));
  CHECK(peak(4) < peak(3));
  CHECK(c.overlap(0, 3) > c.overlap(0, 4));
  CHECK(c.overlap(0, 3) > 0.1);
  CHECK(c.overlap(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("profile options are validated") {
  ProfileOptions o;
  o.d_max = o.d_min;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  CHECK_THROWS_AS(potential_profile(CavityGeometry{}, lib(), 0.0), ConfigError);
}
