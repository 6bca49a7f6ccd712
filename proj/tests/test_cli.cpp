#include <doctest.h>

#include <cmath>
#include <fstream>

#include "casimir_fp/errors.hpp"
#include "casimir_fp/scenario.hpp"

using namespace casimir_fp;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("casimir_fp_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("quantities need units") {
  CHECK(parse_quantity("0.15um", Dimension::kLength) == parse_quantity("150nm", Dimension::kLength));
  CHECK(parse_quantity("150 nm", Dimension::kLength) == doctest::Approx(150e-9).epsilon(1e-15));
  CHECK(parse_quantity("300K", Dimension::kTemperature) == 300.0);
  CHECK(parse_quantity("20x20um", Dimension::kArea) == doctest::Approx(400e-12).epsilon(1e-14));
  CHECK(parse_quantity("1260kg/m3", Dimension::kDensity) == 1260.0);
  CHECK(parse_quantity("1.26g/cm3", Dimension::kDensity) == doctest::Approx(1260.0).epsilon(1e-14));
  CHECK_THROWS_AS(parse_quantity("150", Dimension::kLength), ConfigError);
  CHECK_THROWS_AS(parse_quantity("150K", Dimension::kLength), ConfigError);
  CHECK_THROWS_AS(parse_quantity("nm", Dimension::kLength), ConfigError);

  const VoltageSpec half = parse_voltage("0.5Vb");
  CHECK(half.relative_to_breakdown);
  CHECK(half.resolve(450.0) == 225.0);
  CHECK(parse_voltage("450V").resolve(900.0) == 450.0);
  CHECK_THROWS_AS(parse_voltage("500"), ConfigError);
}

TEST_CASE("configuration defaults") {
  const ScenarioConfig c = parse_config(std::nullopt);
  const CavityGeometry g = c.resolved_geometry();
  CHECK(g.plate_thickness == 40e-9);
  CHECK(g.teflon_thickness == 10e-9);
  CHECK(g.ito_thickness == 5e-9);
  CHECK(g.silica_thickness == 150e-9);
  CHECK(g.temperature == 300.0);
  CHECK(g.voltage == 0.0);
  CHECK(c.breakdown() == 450.0);
}

TEST_CASE("flags override the file, which overrides the defaults") {
  const fs::path dir = scratch_dir("precedence");
  std::ofstream(dir / "run.json") << R"({
    // comments are allowed
    "geometry": {"silica": "200nm", "ito": "6nm"},
    "gate": {"voltage": "0.5Vb"}
  })";
  const ScenarioConfig file_only = parse_config(dir / "run.json");
  CHECK(file_only.geometry.silica_thickness == doctest::Approx(200e-9));
  CHECK(file_only.resolved_geometry().voltage == doctest::Approx(300.0));

  const ScenarioConfig both =
      parse_config(dir / "run.json", {{"geometry.silica", "300nm"}, {"temperature", "350K"}});
  CHECK(both.geometry.silica_thickness == doctest::Approx(300e-9));
  CHECK(both.geometry.ito_thickness == doctest::Approx(6e-9));
  CHECK(both.resolved_geometry().voltage == doctest::Approx(450.0));
  CHECK(both.geometry.temperature == 350.0);
  CHECK(both.geometry.teflon_thickness == 10e-9);
  fs::remove_all(dir);
}

TEST_CASE("bad configurations are rejected") {
  try {
    parse_config(std::nullopt, {{"gate.voltage", "500V"}});
    FAIL("expected a breakdown error");
  } catch (const BreakdownError& e) {
    CHECK(std::string(e.what()).find("450 V") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"gate.voltage", "500"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"geometry.silcia", "100nm"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"geometry.silica", "-5nm"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/run.json")), ConfigError);

  ScenarioConfig c;
  CHECK_THROWS_AS(c.merge(nlohmann::json::parse(R"({"geometry": {"colour": "red"}})")), ConfigError);
  CHECK_THROWS_AS(c.set("geometry.gap", 85), ConfigError);
}

TEST_CASE("configuration round trip through JSON") {
  ScenarioConfig c = parse_config(std::nullopt, {{"geometry.silica", "175nm"},
                                                 {"gate.voltage", "0.25Vb"},
                                                 {"numerics.rel_tol", "1e-7"}});
  ScenarioConfig back;
  back.merge(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.geometry.silica_thickness == c.geometry.silica_thickness);
  for (const std::string& key : ScenarioConfig::keys()) CHECK(c.to_json().dump().size() > key.size());
}

TEST_CASE("CSV round trip") {
  Table t{{{"d_nm", CellKind::kReal}, {"n", CellKind::kInteger}, {"status", CellKind::kText}}, {}};
  t.add({0.1 + 0.2, std::int64_t{7}, std::string("ok")});
  t.add({std::nan(""), std::int64_t{-3}, std::string("not detectable, see log")});
  t.add({1e-300, std::int64_t{0}, std::string("say \"hi\"")});
  const Table back = parse_csv(to_csv(t, "note"), t.schema);
  REQUIRE(back.rows.size() == 3);
  CHECK(std::get<double>(back.rows[0][0]) == 0.1 + 0.2);
  CHECK(std::isnan(std::get<double>(back.rows[1][0])));
  CHECK(std::get<std::string>(back.rows[1][2]) == "not detectable, see log");
  CHECK(std::get<std::string>(back.rows[2][2]) == "say \"hi\"");
  CHECK(std::get<std::int64_t>(back.rows[1][1]) == -3);
  CHECK(format_real(0.1) == "0.1");

  const Table empty = parse_csv(to_csv(Table{t.schema, {}}), t.schema);
  CHECK(empty.rows.empty());
}

TEST_CASE("schema violations name the column") {
  Table t{{{"d_nm", CellKind::kReal}, {"stable", CellKind::kInteger}}, {}};
  try {
    t.add({1.0, 2.0});
    FAIL("expected a schema error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("stable") != std::string::npos);
  }
  CHECK(t.rows.empty());
  try {
    parse_csv("d_nm,unstable\n1,2\n", t.schema);
    FAIL("expected a header error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unstable") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv("d_nm,stable\n1,x\n", t.schema), ConfigError);
}

TEST_CASE("manifest hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");

  const MaterialLibrary lib = MaterialLibrary::defaults();
  ScenarioConfig a, b;
  a.jobs = 1;
  b.jobs = 8;
  b.out_dir = "elsewhere";
  RunManifest ma("pressure", a, lib), mb("pressure", b, lib);
  ma.add_checksum("pressure.csv", "1,2\n");
  mb.add_checksum("pressure.csv", "1,2\n");
  CHECK(ma.hash() == mb.hash());

  ScenarioConfig other;
  other.geometry.silica_thickness = 200e-9;
  RunManifest mc("pressure", other, lib);
  mc.add_checksum("pressure.csv", "1,2\n");
  CHECK(mc.hash() != ma.hash());
  mb.add_checksum("extra.csv", "");
  CHECK(mb.hash() != ma.hash());
  CHECK(RunManifest("spectrum", a, lib).hash() != RunManifest("pressure", a, lib).hash());
}

TEST_CASE("stage failures carry the stage name") {
  const MaterialLibrary lib = MaterialLibrary::defaults();
  RunManifest m("test", ScenarioConfig{}, lib);
  CHECK(m.stage("ok", [] { return 5; }) == 5);
  try {
    m.stage("solve", []() -> int { throw NumericalError("diverged"); });
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()) == "stage 'solve': diverged");
  }
  const nlohmann::json j = m.to_json();
  CHECK(j["stages"].size() == 2);
  CHECK(j["stages"][1]["stage"] == "solve");
}

TEST_CASE("pressure table") {
  ScenarioConfig c;
  c.jobs = 2;
  const Table t = pressure_table(c, MaterialLibrary::defaults(), 40e-9, 200e-9, 5);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.schema == pressure_schema());
  CHECK(std::get<double>(t.rows[0][0]) == 40.0);
  CHECK(std::get<double>(t.rows[4][0]) == 200.0);
  CHECK(std::get<double>(t.rows[0][1]) > 0.0);
  CHECK(std::get<double>(t.rows[4][1]) < 0.0);
  CHECK_THROWS_AS(linear_grid(1.0, 2.0, 0), ConfigError);
}
