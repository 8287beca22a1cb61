#pragma once

// File formats: YAML experiment configs, CSV curves and charts, JSON results.

#include "biphoton/experiments.hpp"

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

namespace biphoton {

// Config files -------------------------------------------------------------

std::string to_yaml(const ExperimentConfig& cfg);
ExperimentConfig config_from_yaml(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Sets a dotted key (e.g. "sorter.phase_error_rad") in YAML text. The key
/// must already exist. Returns the updated YAML text.
std::string apply_override(const std::string& yaml_text, const std::string& key, const std::string& value);

/// All invariant violations of a config, empty when clean.
std::vector<std::string> validate_config_text(const std::string& yaml_text);
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// Result files -------------------------------------------------------------

inline constexpr const char* kScanCsvHeader = "setting_index,theta1_deg,theta2_deg,analytic_p,counts,sigma_counts";

void write_scan_csv(std::ostream& os, const ScanResult& scan);
std::vector<ScanPoint> read_scan_csv(std::istream& is);

void write_chsh_csv(std::ostream& os, const ChshResult& r, const ChshSettings& settings);
ChshResult read_chsh_csv(std::istream& is);
void write_chart_csv(std::ostream& os, const SortingChart& chart);
SortingChart read_chart_csv(std::istream& is);

nlohmann::json to_json(const ScanResult& scan);
nlohmann::json to_json(const ChshResult& r);
nlohmann::json summary_json(const ResultSet& r);

/// Writes config.yaml, summary.json, one CSV per curve, chsh.csv and
/// chart.csv (when present) into `dir`. Returns the file names written.
std::vector<std::string> write_result_set(const std::string& dir, const ResultSet& r, const ExperimentConfig& cfg);

std::string format_double(double x);

}  // namespace biphoton
