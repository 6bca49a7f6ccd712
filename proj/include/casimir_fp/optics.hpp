// optics.hpp
//
// Normal-incidence reflectance of the full Fabry-Perot cavity and
// extraction of its resonance dips.
#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <vector>

#include "casimir_fp/equilibrium.hpp"

namespace casimir_fp {

// glycerol | gold plate | glycerol gap d | lower stack layers | gold.
LayerStack full_cavity_stack(const CavityGeometry& geometry, double d, const GateState& gate,
                             const MaterialLibrary& lib);
LayerStack full_cavity_stack(const CavityGeometry& geometry, double d, const MaterialLibrary& lib);

struct SpectrumOptions {
  double lambda_min = 400e-9;
  double lambda_max = 1200e-9;
  int points = 1601;
  int jobs = 1;
  Eigen::ArrayXd wavelengths() const;
  void validate() const;
};

// eps(omega) of each material on one wavelength grid, filled on first use.
// Not thread-safe; keep one per driver thread.
class PermittivityTable {
 public:
  explicit PermittivityTable(Eigen::ArrayXd wavelengths, int jobs = 1);
  const Eigen::ArrayXcd& operator()(const MaterialRef& material);
  const Eigen::ArrayXd& wavelengths() const { return wavelengths_; }

 private:
  Eigen::ArrayXd wavelengths_;
  int jobs_;
  std::map<const DielectricModel*, std::pair<MaterialRef, Eigen::ArrayXcd>> cache_;
};

struct Spectrum {
  Eigen::ArrayXd wavelength;   // m, ascending
  Eigen::ArrayXd reflectance;
  double gap = 0, voltage = 0, temperature = 0, silica_thickness = 0;
};

Spectrum reflectance_spectrum(const LayerStack& stack, const SpectrumOptions& options = {});
Spectrum reflectance_spectrum(const LayerStack& stack, PermittivityTable& table);
// Spectrum of the full cavity at gap d, with the geometry snapshot filled in.
Spectrum cavity_spectrum(const CavityGeometry& geometry, double d, const MaterialLibrary& lib,
                         const SpectrumOptions& options = {});

struct Resonance {
  double lambda_res;   // m
  double depth;        // prominence of the dip
  double reflectance;  // interpolated minimum
  double fwhm;         // m
  double q_factor;
  std::optional<int> mode_order;
};

struct ResonanceOptions {
  double depth_threshold = 0.05;
};

struct ResonanceSearch {
  Resonance deepest;
  std::vector<Resonance> dips;  // ascending wavelength
};

// Local minima with prominence above the threshold. Throws
// ResonanceNotDetectable when there are none.
ResonanceSearch find_resonance(const Spectrum& spectrum, const ResonanceOptions& options = {});

// Wavelength interval around the dip where R <= R_min + 2 band: any point
// in it could be the minimum under a +-band reflectance error.
std::pair<double, double> dip_location_interval(const Spectrum& spectrum, const Resonance& dip,
                                                double band = 0.05);

struct ReadoutCheck {
  Resonance at_d;
  Resonance at_shifted;
  double shift;  // lambda(d - delta_d) - lambda(d)
  std::pair<double, double> interval_d, interval_shifted;
  bool resolvable;  // the two location intervals are disjoint
};

// Spectroscopic distance readout: does moving the plate from d to
// d - delta_d move the dip beyond its location uncertainty?
ReadoutCheck separation_readout(const CavityGeometry& geometry, double d, double delta_d,
                                const MaterialLibrary& lib, const SpectrumOptions& spectrum = {},
                                const ResonanceOptions& resonance = {}, double band = 0.05);

// Deepest dip at gap d whose position also resolves a delta_d change of the
// gap. Throws ResonanceNotDetectable otherwise.
Resonance detect_resonance(const CavityGeometry& geometry, double d, const MaterialLibrary& lib,
                           const SpectrumOptions& spectrum = {},
                           const ResonanceOptions& resonance = {}, double delta_d = 3e-9,
                           double band = 0.05);

// Round-trip order estimate 2 * (optical path between the mirrors) / lambda.
std::optional<int> mode_order(const LayerStack& cavity, double lambda);

struct StimulusRow {
  double stimulus;
  std::optional<double> d_e;
  std::optional<Resonance> resonance;
  std::optional<double> delta_lambda;  // relative to the first detected node
  std::string error;
};

struct StimulusSweep {
  SweepAxis axis;
  std::vector<StimulusRow> rows;
  std::optional<double> tuning_range;  // max - min lambda_res over detected nodes
};

struct StimulusSettings {
  EquilibriumSettings equilibrium;
  SpectrumOptions spectrum;
  ResonanceOptions resonance;
};

StimulusSweep resonance_vs_stimulus(SweepAxis axis, const std::vector<double>& grid,
                                    const CavityGeometry& base, const MaterialLibrary& lib,
                                    const StimulusSettings& settings = {}, int jobs = 1);

}  // namespace casimir_fp
