#pragma once

// End-to-end experiment pipelines: source -> elements -> detectors.

#include "biphoton/measurement.hpp"
#include "biphoton/sorter.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace biphoton {

/// One beam-line element as it appears in a config file. Angles in degrees,
/// interferometric phases in radians, paths as integers.
struct ElementSpec {
  std::string kind;
  std::map<std::string, double> params;

  double get(const std::string& key) const;
  int path(const std::string& key) const;
};

struct MeasurementPlan {
  Analyzer::Kind analyzer = Analyzer::Kind::kPolarization;
  int port_a = 0;
  int port_b = 1;
  // Reduced OAM basis per port: values standing for |E> and |O>.
  int reduced_even_a = 2;
  int reduced_odd_a = 1;
  int reduced_even_b = 0;
  int reduced_odd_b = -1;
  int pairing = 1;
  double analyzer_efficiency = 1;

  std::vector<double> theta1_deg{0, 45, 90, 135};
  double theta2_start_deg = 0;
  double theta2_stop_deg = 180;
  int theta2_steps = 37;
  ChshSettings chsh;

  bool scans = true;
  bool bell = true;
  bool chart = false;

  Analyzer analyzer_a() const;
  Analyzer analyzer_b() const;
};

struct ExperimentConfig {
  std::string name;
  int paths = 2;
  SpdcConfig source;
  std::vector<ElementSpec> pipeline;
  std::optional<SorterConfig> sorter;
  MeasurementPlan plan;
  DetectionModel detection;

  ModeSpace space() const { return ModeSpace(source.truncation, paths); }
};

enum class Fidelity { kIdeal, kFitted };

const std::vector<std::string>& preset_names();

/// Fully populated config for a named experiment. kIdeal uses perfect
/// components; kFitted carries the documented imperfection values that
/// reproduce the measured visibilities.
ExperimentConfig preset(const std::string& name, Fidelity fidelity = Fidelity::kIdeal);

/// Builds one beam-line element. Throws std::domain_error naming unknown kinds.
Element build_element(const ElementSpec& spec, const ModeSpace& space, const std::optional<SorterConfig>& sorter);

/// Composed transfer operator of the pipeline.
Element pipeline_transfer(const ExperimentConfig& cfg);

/// Source ensemble after the pipeline.
Ensemble<double> propagate(const ExperimentConfig& cfg);

struct BasisVisibility {
  double value = 0;
  double sigma = 0;
  int curves = 0;
};

struct ResultSet {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  Mode mode = Mode::kAnalytic;
  std::vector<ScanResult> scans;
  BasisVisibility hv;  // theta1 = 0, 90 (mod 90 = 0)
  BasisVisibility da;  // theta1 = 45, 135 (mod 90 = 45)
  std::optional<ChshResult> chsh;
  std::optional<SortingChart> chart;
  std::optional<PortPairProbabilities> port_pairs;
};

ResultSet run(const ExperimentConfig& cfg, Mode mode);

/// Mean visibility of curves with theta1 = offset (mod 90).
BasisVisibility basis_visibility(const std::vector<ScanResult>& scans, double offset_deg);

struct ImperfectionFit {
  double accidental_rate = 0;
  double phase_coherence = 1;
  double hv = 0;
  double da = 0;
};

/// Bisection for the accidental rate (sets the HV/EO visibility) and then
/// the phase coherence (sets the DA visibility), in analytic mode.
ImperfectionFit fit_imperfections(ExperimentConfig cfg, double target_hv, double target_da);

std::string config_hash(const ExperimentConfig& cfg);

}  // namespace biphoton
