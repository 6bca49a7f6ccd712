// scenario.hpp
//
// Run configuration, run manifests, and the table-producing drivers used by
// the command-line tool and the figure reproductions.
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "casimir_fp/brownian.hpp"
#include "casimir_fp/optics.hpp"
#include "casimir_fp/table.hpp"
#include "casimir_fp/units.hpp"

namespace casimir_fp {

inline constexpr const char* kToolVersion = "casimir_fp 1.0.0";

struct ScenarioConfig {
  CavityGeometry geometry;  // geometry.voltage is resolved from `voltage`
  VoltageSpec voltage;
  BodyForces forces;
  QuadratureSpec quad;
  EquilibriumOptions solver;
  std::pair<double, double> bracket{10e-9, 500e-9};
  SpectrumOptions spectrum;
  ResonanceOptions resonance;
  double reflectance_band = 0.05;
  double readout_step = 3e-9;
  ProfileOptions profile;
  double area = 400e-12;  // 20 um x 20 um
  std::optional<std::filesystem::path> material_data;
  std::filesystem::path out_dir = ".";
  bool json_mirror = false;
  int jobs = 0;  // 0: one per hardware thread

  // Keys accepted by set(): "geometry.silica", "gate.voltage", ...
  static const std::vector<std::string>& keys();
  // Applies one setting. Physical values are strings with units; unknown
  // keys and unit-less physical values throw ConfigError.
  void set(const std::string& key, const nlohmann::json& value);
  // Applies a (nested) JSON document through set().
  void merge(const nlohmann::json& doc);

  double breakdown() const;
  // Geometry with the gate voltage resolved; BreakdownError above V_b.
  CavityGeometry resolved_geometry() const;
  EquilibriumSettings equilibrium_settings() const;
  BrownianSettings brownian_settings() const;
  StimulusSettings stimulus_settings() const;
  MaterialLibrary load_materials() const;
  void validate() const;
  nlohmann::json to_json() const;
};

// Defaults, then the file (if any), then flag overrides, in that order.
ScenarioConfig parse_config(const std::optional<std::filesystem::path>& file,
                            const std::vector<std::pair<std::string, std::string>>& flags = {});

std::string fnv1a_hex(std::string_view data);

class RunManifest {
 public:
  RunManifest(std::string command, const ScenarioConfig& config, const MaterialLibrary& lib);

  void add_checksum(const std::string& name, std::string_view content);
  void add_output(const std::filesystem::path& file);
  // Failed sweep nodes and other non-fatal problems.
  void add_error(const std::string& message);
  // Times a stage; the stage name is prefixed to any exception it throws.
  template <typename F>
  auto stage(const std::string& name, F&& f) -> decltype(f());

  // Hash over version, command, config and checksums; wall times excluded.
  std::string hash() const;
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::string command_;
  nlohmann::json config_;
  std::map<std::string, std::string> checksums_;
  std::vector<std::pair<std::string, double>> stage_seconds_;
  std::vector<std::string> outputs_;
  std::vector<std::string> errors_;
};

[[noreturn]] void rethrow_in_stage(const std::string& stage);

template <typename F>
auto RunManifest::stage(const std::string& name, F&& f) -> decltype(f()) {
  const auto t0 = std::chrono::steady_clock::now();
  auto done = [&] {
    stage_seconds_.emplace_back(
        name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      done();
    } else {
      auto r = f();
      done();
      return r;
    }
  } catch (...) {
    done();
    rethrow_in_stage(name);
  }
}

// ---------------------------------------------------------------------------
// Table drivers

Schema pressure_schema();
Schema equilibrium_schema();
Schema spectrum_schema();
Schema resonance_schema();
Schema brownian_schema();
Schema brownian_summary_schema();

std::vector<double> linear_grid(double from, double to, int points);

Table pressure_table(const ScenarioConfig& config, const MaterialLibrary& lib, double d_min,
                     double d_max, int points);
// axis_value is reported in V, K or nm according to the axis.
Table equilibrium_table(const ScenarioConfig& config, const MaterialLibrary& lib, SweepAxis axis,
                        const std::vector<double>& grid, std::vector<std::string>* errors = nullptr);
Table spectrum_table(const ScenarioConfig& config, const MaterialLibrary& lib, double d);
Table resonance_table(const ScenarioConfig& config, const MaterialLibrary& lib, SweepAxis axis,
                      const std::vector<double>& grid, std::vector<std::string>* errors = nullptr);

struct BrownianTables {
  Table density;
  Table summary;
};
BrownianTables brownian_tables(const ScenarioConfig& config, const MaterialLibrary& lib);

// ---------------------------------------------------------------------------
// Figure drivers

const std::vector<std::string>& figure_ids();

struct FigureOutput {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

// Writes the data tables behind one figure into config.out_dir, plus a
// manifest. Stage failures propagate with the stage name; tables already
// written are kept.
FigureOutput run_figure(const std::string& id, const ScenarioConfig& config);

}  // namespace casimir_fp
