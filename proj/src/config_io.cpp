#include "biphoton/io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace biphoton {

namespace {

const char* analyzer_name(Analyzer::Kind k) {
  switch (k) {
    case Analyzer::Kind::kPolarization: return "polarization";
    case Analyzer::Kind::kOamReduced: return "oam-reduced";
    case Analyzer::Kind::kOamFull: return "oam-full";
  }
  return "?";
}

Analyzer::Kind analyzer_kind(const std::string& s) {
  if (s == "polarization") return Analyzer::Kind::kPolarization;
  if (s == "oam-reduced") return Analyzer::Kind::kOamReduced;
  if (s == "oam-full") return Analyzer::Kind::kOamFull;
  throw std::domain_error("plan.analyzer: unknown analyzer '" + s + "'");
}

const char* spectrum_name(SpectrumModel::Kind k) {
  switch (k) {
    case SpectrumModel::Kind::kGaussianEnvelope: return "gaussian";
    case SpectrumModel::Kind::kUniformBand: return "uniform";
    case SpectrumModel::Kind::kExplicit: return "explicit";
  }
  return "?";
}

SpectrumModel::Kind spectrum_kind(const std::string& s) {
  if (s == "gaussian") return SpectrumModel::Kind::kGaussianEnvelope;
  if (s == "uniform") return SpectrumModel::Kind::kUniformBand;
  if (s == "explicit") return SpectrumModel::Kind::kExplicit;
  throw std::domain_error("source.spectrum.kind: unknown spectrum '" + s + "'");
}

// Reports keys of `node` not listed in `known`.
void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> known,
                std::vector<std::string>& findings) {
  if (!node.IsMap()) {
    findings.push_back(where + ": expected a table");
    return;
  }
  const std::set<std::string> k(known.begin(), known.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!k.contains(key)) findings.push_back(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw std::domain_error(where + "." + key + ": invalid value '" + node[key].Scalar() + "'");
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_yaml(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  out << YAML::Key << "paths" << YAML::Value << cfg.paths;

  const auto& s = cfg.source;
  out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pump_oam" << YAML::Value << s.pump_oam;
  out << YAML::Key << "collinear" << YAML::Value << s.collinear;
  out << YAML::Key << "truncation" << YAML::Value << s.truncation;
  out << YAML::Key << "phase_sign" << YAML::Value << s.phase_sign;
  out << YAML::Key << "phase_coherence" << YAML::Value << s.phase_coherence;
  out << YAML::Key << "path" << YAML::Value << s.path;
  out << YAML::Key << "idler_path" << YAML::Value << s.idler_path;
  out << YAML::Key << "signal_path" << YAML::Value << s.signal_path;
  out << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << spectrum_name(s.spectrum.kind);
  out << YAML::Key << "center" << YAML::Value;
  if (s.spectrum.center) out << *s.spectrum.center;
  else out << "auto";
  out << YAML::Key << "width" << YAML::Value << s.spectrum.width;
  out << YAML::Key << "band_min" << YAML::Value << s.spectrum.band_min;
  out << YAML::Key << "band_max" << YAML::Value << s.spectrum.band_max;
  out << YAML::Key << "weights" << YAML::Value;
  if (s.spectrum.weights.empty()) out << YAML::Flow;
  out << YAML::BeginSeq;
  for (const auto& [m, c] : s.spectrum.weights)
    out << YAML::Flow << YAML::BeginSeq << m << c.real() << c.imag() << YAML::EndSeq;
  out << YAML::EndSeq;
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "pipeline" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : cfg.pipeline) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << e.kind;
    for (const auto& [k, v] : e.params) out << YAML::Key << k << YAML::Value << v;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (cfg.sorter) {
    const auto& so = *cfg.sorter;
    out << YAML::Key << "sorter" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "relative_dove_angle_deg" << YAML::Value << so.relative_dove_angle * 180.0 / std::numbers::pi;
    out << YAML::Key << "phase_error_rad" << YAML::Value << so.phase_error;
    out << YAML::Key << "reflectivity" << YAML::Value << so.reflectivity;
    out << YAML::Key << "arm_phase_rad" << YAML::Value << so.arm_phase;
    out << YAML::Key << "background_leak" << YAML::Value << so.background_leak;
    out << YAML::EndMap;
  }

  const auto& p = cfg.plan;
  out << YAML::Key << "plan" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "analyzer" << YAML::Value << analyzer_name(p.analyzer);
  out << YAML::Key << "port_a" << YAML::Value << p.port_a;
  out << YAML::Key << "port_b" << YAML::Value << p.port_b;
  out << YAML::Key << "reduced_even_a" << YAML::Value << p.reduced_even_a;
  out << YAML::Key << "reduced_odd_a" << YAML::Value << p.reduced_odd_a;
  out << YAML::Key << "reduced_even_b" << YAML::Value << p.reduced_even_b;
  out << YAML::Key << "reduced_odd_b" << YAML::Value << p.reduced_odd_b;
  out << YAML::Key << "pairing" << YAML::Value << p.pairing;
  out << YAML::Key << "analyzer_efficiency" << YAML::Value << p.analyzer_efficiency;
  out << YAML::Key << "theta1_deg" << YAML::Value << YAML::Flow << p.theta1_deg;
  out << YAML::Key << "theta2_start_deg" << YAML::Value << p.theta2_start_deg;
  out << YAML::Key << "theta2_stop_deg" << YAML::Value << p.theta2_stop_deg;
  out << YAML::Key << "theta2_steps" << YAML::Value << p.theta2_steps;
  out << YAML::Key << "chsh_hwp_deg" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double a : p.chsh.hwp_deg) out << a;
  out << YAML::EndSeq;
  out << YAML::Key << "scans" << YAML::Value << p.scans;
  out << YAML::Key << "bell" << YAML::Value << p.bell;
  out << YAML::Key << "chart" << YAML::Value << p.chart;
  out << YAML::EndMap;

  const auto& d = cfg.detection;
  out << YAML::Key << "detection" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pair_rate" << YAML::Value << d.pair_rate;
  out << YAML::Key << "integration_time_s" << YAML::Value << d.integration_time;
  out << YAML::Key << "efficiency_a" << YAML::Value << d.efficiency_a;
  out << YAML::Key << "efficiency_b" << YAML::Value << d.efficiency_b;
  out << YAML::Key << "accidental_rate" << YAML::Value << d.accidental_rate;
  out << YAML::Key << "seed" << YAML::Value << d.seed;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

ExperimentConfig parse(const YAML::Node& root, std::vector<std::string>& findings) {
  ExperimentConfig cfg;
  check_keys(root, "config", {"name", "paths", "source", "pipeline", "sorter", "plan", "detection"}, findings);
  read(root, "name", cfg.name, "config");
  read(root, "paths", cfg.paths, "config");

  if (const auto s = root["source"]) {
    check_keys(s, "source",
               {"pump_oam", "collinear", "truncation", "phase_sign", "phase_coherence", "path", "idler_path",
                "signal_path", "spectrum"},
               findings);
    auto& src = cfg.source;
    read(s, "pump_oam", src.pump_oam, "source");
    read(s, "collinear", src.collinear, "source");
    read(s, "truncation", src.truncation, "source");
    read(s, "phase_sign", src.phase_sign, "source");
    read(s, "phase_coherence", src.phase_coherence, "source");
    read(s, "path", src.path, "source");
    read(s, "idler_path", src.idler_path, "source");
    read(s, "signal_path", src.signal_path, "source");
    if (const auto sp = s["spectrum"]) {
      check_keys(sp, "source.spectrum", {"kind", "center", "width", "band_min", "band_max", "weights"}, findings);
      std::string kind = spectrum_name(src.spectrum.kind);
      read(sp, "kind", kind, "source.spectrum");
      src.spectrum.kind = spectrum_kind(kind);
      if (sp["center"]) {
        if (sp["center"].Scalar() == "auto") src.spectrum.center.reset();
        else src.spectrum.center = sp["center"].as<double>();
      }
      read(sp, "width", src.spectrum.width, "source.spectrum");
      read(sp, "band_min", src.spectrum.band_min, "source.spectrum");
      read(sp, "band_max", src.spectrum.band_max, "source.spectrum");
      if (const auto w = sp["weights"]) {
        src.spectrum.weights.clear();
        for (const auto& item : w) {
          if (!item.IsSequence() || item.size() < 2 || item.size() > 3)
            throw std::domain_error("source.spectrum.weights: entries are [m, re] or [m, re, im]");
          const double im = item.size() == 3 ? item[2].as<double>() : 0.0;
          src.spectrum.weights.emplace_back(item[0].as<int>(), std::complex<double>(item[1].as<double>(), im));
        }
      }
    }
  }

  if (const auto pl = root["pipeline"]) {
    if (!pl.IsSequence()) throw std::domain_error("pipeline: expected a list of elements");
    for (const auto& item : pl) {
      if (!item.IsMap() || !item["kind"]) throw std::domain_error("pipeline: every element needs a 'kind'");
      ElementSpec e;
      e.kind = item["kind"].as<std::string>();
      for (const auto& kv : item) {
        const auto key = kv.first.as<std::string>();
        if (key == "kind") continue;
        try {
          e.params[key] = kv.second.as<double>();
        } catch (const YAML::Exception&) {
          throw std::domain_error("pipeline element '" + e.kind + "': parameter '" + key + "' is not a number");
        }
      }
      cfg.pipeline.push_back(std::move(e));
    }
  }

  if (const auto so = root["sorter"]) {
    check_keys(so, "sorter",
               {"relative_dove_angle_deg", "phase_error_rad", "reflectivity", "arm_phase_rad", "background_leak"},
               findings);
    SorterConfig sc;
    double alpha_deg = sc.relative_dove_angle * 180.0 / std::numbers::pi;
    read(so, "relative_dove_angle_deg", alpha_deg, "sorter");
    sc.relative_dove_angle = deg(alpha_deg);
    read(so, "phase_error_rad", sc.phase_error, "sorter");
    read(so, "reflectivity", sc.reflectivity, "sorter");
    read(so, "arm_phase_rad", sc.arm_phase, "sorter");
    read(so, "background_leak", sc.background_leak, "sorter");
    cfg.sorter = sc;
  }

  if (const auto p = root["plan"]) {
    check_keys(p, "plan",
               {"analyzer", "port_a", "port_b", "reduced_even_a", "reduced_odd_a", "reduced_even_b", "reduced_odd_b",
                "pairing", "analyzer_efficiency", "theta1_deg", "theta2_start_deg", "theta2_stop_deg", "theta2_steps",
                "chsh_hwp_deg", "scans", "bell", "chart"},
               findings);
    auto& plan = cfg.plan;
    std::string kind = analyzer_name(plan.analyzer);
    read(p, "analyzer", kind, "plan");
    plan.analyzer = analyzer_kind(kind);
    read(p, "port_a", plan.port_a, "plan");
    read(p, "port_b", plan.port_b, "plan");
    read(p, "reduced_even_a", plan.reduced_even_a, "plan");
    read(p, "reduced_odd_a", plan.reduced_odd_a, "plan");
    read(p, "reduced_even_b", plan.reduced_even_b, "plan");
    read(p, "reduced_odd_b", plan.reduced_odd_b, "plan");
    read(p, "pairing", plan.pairing, "plan");
    read(p, "analyzer_efficiency", plan.analyzer_efficiency, "plan");
    read(p, "theta1_deg", plan.theta1_deg, "plan");
    read(p, "theta2_start_deg", plan.theta2_start_deg, "plan");
    read(p, "theta2_stop_deg", plan.theta2_stop_deg, "plan");
    read(p, "theta2_steps", plan.theta2_steps, "plan");
    if (p["chsh_hwp_deg"]) {
      const auto v = p["chsh_hwp_deg"].as<std::vector<double>>();
      if (v.size() != 4) throw std::domain_error("plan.chsh_hwp_deg: expected four angles [a, a', b, b']");
      std::copy(v.begin(), v.end(), plan.chsh.hwp_deg.begin());
    }
    read(p, "scans", plan.scans, "plan");
    read(p, "bell", plan.bell, "plan");
    read(p, "chart", plan.chart, "plan");
  }

  if (const auto d = root["detection"]) {
    check_keys(d, "detection",
               {"pair_rate", "integration_time_s", "efficiency_a", "efficiency_b", "accidental_rate", "seed"}, findings);
    auto& det = cfg.detection;
    read(d, "pair_rate", det.pair_rate, "detection");
    read(d, "integration_time_s", det.integration_time, "detection");
    read(d, "efficiency_a", det.efficiency_a, "detection");
    read(d, "efficiency_b", det.efficiency_b, "detection");
    read(d, "accidental_rate", det.accidental_rate, "detection");
    read(d, "seed", det.seed, "detection");
  }
  return cfg;
}

YAML::Node load_node(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw std::domain_error(std::string("config: YAML syntax error: ") + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_yaml(const std::string& text) {
  std::vector<std::string> findings;
  ExperimentConfig cfg = parse(load_node(text), findings);
  if (!findings.empty()) throw std::domain_error(findings.front());
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_yaml(ss.str());
}

std::string apply_override(const std::string& yaml_text, const std::string& key, const std::string& value) {
  YAML::Node root = load_node(yaml_text);
  YAML::Node cur = root;
  std::string part;
  std::stringstream ks(key);
  std::vector<std::string> parts;
  while (std::getline(ks, part, '.')) parts.push_back(part);
  if (parts.empty()) throw std::domain_error("override: empty key");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    YAML::Node next;
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[i]);
      } catch (const std::exception&) {
        throw std::domain_error("override: '" + key + "' indexes a list with a non-number");
      }
      if (idx >= cur.size()) throw std::domain_error("override: '" + key + "' index out of range");
      next = cur[idx];
    } else if (cur.IsMap() && cur[parts[i]]) {
      next = cur[parts[i]];
    } else {
      throw std::domain_error("override: unknown config key '" + key + "'");
    }
    if (i + 1 == parts.size()) {
      next = load_node(value);
    } else {
      cur.reset(next);
    }
  }
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> f;
  const auto add = [&](std::string s) { f.push_back(std::move(s)); };
  const auto& s = cfg.source;
  if (cfg.paths < 1) add("paths: " + std::to_string(cfg.paths) + " must be >= 1");
  if (s.truncation < 0) add("source.truncation: must be >= 0");
  if (s.phase_sign != 1 && s.phase_sign != -1) add("source.phase_sign: must be +1 or -1");
  if (!(s.phase_coherence >= 0 && s.phase_coherence <= 1))
    add("source.phase_coherence: " + format_double(s.phase_coherence) + " outside [0, 1]");
  const auto in_range = [&](int p) { return p >= 0 && p < cfg.paths; };
  if (s.collinear) {
    if (!in_range(s.path)) add("source.path: " + std::to_string(s.path) + " not a declared path");
  } else {
    if (!in_range(s.idler_path)) add("source.idler_path: " + std::to_string(s.idler_path) + " not a declared path");
    if (!in_range(s.signal_path)) add("source.signal_path: " + std::to_string(s.signal_path) + " not a declared path");
    if (s.idler_path == s.signal_path) add("source: idler and signal paths collide");
  }
  if (s.truncation >= 0) {
    try {
      (void)spectrum_weights(s.spectrum, s.pump_oam, s.truncation);
    } catch (const std::exception& e) {
      add(std::string("source.spectrum: ") + e.what());
    }
  }

  if (cfg.sorter) {
    const auto& so = *cfg.sorter;
    if (!(so.reflectivity >= 0 && so.reflectivity <= 1))
      add("sorter.reflectivity: " + format_double(so.reflectivity) + " outside [0, 1]");
    if (!(so.background_leak >= 0 && so.background_leak <= 1))
      add("sorter.background_leak: " + format_double(so.background_leak) + " outside [0, 1]");
    if (!std::isfinite(so.relative_dove_angle) || !std::isfinite(so.phase_error) || !std::isfinite(so.arm_phase))
      add("sorter: phases must be finite");
  }

  bool has_sorter = false;
  if (cfg.paths >= 1 && s.truncation >= 0) {
    const ModeSpace space(s.truncation, cfg.paths);
    for (std::size_t i = 0; i < cfg.pipeline.size(); ++i) {
      const auto& e = cfg.pipeline[i];
      has_sorter = has_sorter || e.kind == "sorter";
      for (const auto& [k, v] : e.params)
        if (!std::isfinite(v)) add("pipeline[" + std::to_string(i) + "] " + e.kind + "." + k + ": not finite");
      if (e.params.contains("angle_deg") && std::abs(e.params.at("angle_deg")) > 360)
        add("pipeline[" + std::to_string(i) + "] " + e.kind + ".angle_deg: outside [-360, 360]");
      try {
        (void)build_element(e, space, cfg.sorter);
      } catch (const std::exception& ex) {
        add("pipeline[" + std::to_string(i) + "]: " + ex.what());
      }
    }
  }

  const auto& p = cfg.plan;
  if (p.scans || p.bell) {
    if (!in_range(p.port_a)) add("plan.port_a: " + std::to_string(p.port_a) + " not a declared path");
    if (!in_range(p.port_b)) add("plan.port_b: " + std::to_string(p.port_b) + " not a declared path");
    if (p.port_a == p.port_b) add("plan: port_a and port_b collide");
  }
  if (p.analyzer == Analyzer::Kind::kOamReduced) {
    const auto parity = [&](int even, int odd, const char* side) {
      if (even % 2 != 0 || odd % 2 == 0)
        add(std::string("plan.reduced_") + side + ": needs an even and an odd OAM value");
      if (std::abs(even) > s.truncation || std::abs(odd) > s.truncation)
        add(std::string("plan.reduced_") + side + ": OAM outside truncation");
    };
    parity(p.reduced_even_a, p.reduced_odd_a, "*_a");
    parity(p.reduced_even_b, p.reduced_odd_b, "*_b");
  }
  if (p.analyzer == Analyzer::Kind::kOamFull && p.pairing % 2 == 0) add("plan.pairing: must be odd");
  if (!(p.analyzer_efficiency >= 0 && p.analyzer_efficiency <= 1)) add("plan.analyzer_efficiency: outside [0, 1]");
  if (p.scans) {
    if (p.theta1_deg.empty()) add("plan.theta1_deg: empty");
    if (p.theta2_steps < 3) add("plan.theta2_steps: at least 3 points are needed for a fringe fit");
    if (!(p.theta2_stop_deg > p.theta2_start_deg)) add("plan: theta2 range is empty");
  }
  for (double a : p.theta1_deg)
    if (!(std::abs(a) <= 360)) add("plan.theta1_deg: " + format_double(a) + " outside [-360, 360]");
  for (double a : p.chsh.hwp_deg)
    if (!(std::abs(a) <= 360)) add("plan.chsh_hwp_deg: " + format_double(a) + " outside [-360, 360]");
  if (p.chart && !has_sorter) add("plan.chart: requires a sorter element in the pipeline");

  try {
    cfg.detection.validate();
  } catch (const std::exception& e) {
    add(e.what());
  }
  return f;
}

std::vector<std::string> validate_config_text(const std::string& yaml_text) {
  std::vector<std::string> findings;
  ExperimentConfig cfg;
  try {
    cfg = parse(load_node(yaml_text), findings);
  } catch (const std::exception& e) {
    findings.emplace_back(e.what());
    return findings;
  }
  for (auto& s : validate_config(cfg)) findings.push_back(std::move(s));
  return findings;
}

}  // namespace biphoton
