#include "biphoton/experiments.hpp"

#include "biphoton/io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace biphoton {

namespace {

// Documented fitted imperfections. Each pair (accidental rate in counts/s,
// phase coherence) reproduces the measured HV/EO and DA visibilities at the
// preset detection model; fit_imperfections() regenerates them.
constexpr double kNoncollinearAccidentals = 933.6099585062118;
constexpr double kNoncollinearCoherence = 0.97614107883817369;

// Sorter phase error chosen for the OAM-sorted experiment (radians). Only the
// combination with the accidental rate is constrained by the visibilities.
constexpr double kOamSortPhaseError = 0.3;
constexpr double kOamSortAccidentals = 6941.1331722151353;
constexpr double kOamSortCoherence = 0.92387096774193522;

constexpr double kPbsAccidentals = 777.28423720780279;
constexpr double kPbsCoherence = 0.86282593480866998;

constexpr double kChshPlus[4] = {0, 22.5, -11.25, -33.75};
constexpr double kChshMinus[4] = {0, 22.5, 11.25, 33.75};

ElementSpec spec(std::string kind, std::map<std::string, double> params) { return {std::move(kind), std::move(params)}; }

void set_chsh_for_sign(ExperimentConfig& cfg) {
  const double* s = cfg.source.phase_sign > 0 ? kChshPlus : kChshMinus;
  cfg.plan.chsh.hwp_deg = {s[0], s[1], s[2], s[3]};
}

}  // namespace

double ElementSpec::get(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw std::domain_error("element '" + kind + "': missing parameter '" + key + "'");
  return it->second;
}

int ElementSpec::path(const std::string& key) const {
  const double v = get(key);
  if (v != std::floor(v)) throw std::domain_error("element '" + kind + "': path '" + key + "' must be an integer");
  return static_cast<int>(v);
}

Analyzer MeasurementPlan::analyzer_a() const {
  Analyzer a;
  a.kind = analyzer;
  a.port = port_a;
  a.even_l = reduced_even_a;
  a.odd_l = reduced_odd_a;
  a.pairing = pairing;
  a.efficiency = analyzer_efficiency;
  return a;
}

Analyzer MeasurementPlan::analyzer_b() const {
  Analyzer b = analyzer_a();
  b.port = port_b;
  b.even_l = reduced_even_b;
  b.odd_l = reduced_odd_b;
  return b;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"noncollinear-pol", "sorter-verify", "oamsort-pol-ent", "pbs-oam-ent"};
  return names;
}

ExperimentConfig preset(const std::string& name, Fidelity fidelity) {
  const bool fitted = fidelity == Fidelity::kFitted;
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.source.truncation = 5;
  cfg.source.spectrum = SpectrumModel::gaussian(1.5);

  if (name == "noncollinear-pol") {
    cfg.paths = 2;
    cfg.source.pump_oam = 0;
    cfg.source.collinear = false;
    cfg.source.idler_path = 0;
    cfg.source.signal_path = 1;
    cfg.plan.analyzer = Analyzer::Kind::kPolarization;
    cfg.plan.port_a = 0;
    cfg.plan.port_b = 1;
    if (fitted) {
      cfg.detection.accidental_rate = kNoncollinearAccidentals;
      cfg.source.phase_coherence = kNoncollinearCoherence;
    }
  } else if (name == "sorter-verify") {
    cfg.paths = 3;
    cfg.source.pump_oam = 0;
    cfg.source.collinear = true;
    cfg.source.path = 0;
    cfg.sorter = SorterConfig{};
    cfg.pipeline = {spec("sorter", {{"in", 0}, {"port_e", 1}, {"port_o", 2}})};
    cfg.plan.port_a = 1;
    cfg.plan.port_b = 2;
    cfg.plan.scans = false;
    cfg.plan.bell = false;
    cfg.plan.chart = true;
  } else if (name == "oamsort-pol-ent") {
    cfg.paths = 3;
    cfg.source.pump_oam = 1;
    cfg.source.collinear = true;
    cfg.source.path = 0;
    cfg.sorter = SorterConfig{};
    cfg.pipeline = {spec("sorter", {{"in", 0}, {"port_e", 1}, {"port_o", 2}})};
    cfg.plan.analyzer = Analyzer::Kind::kPolarization;
    cfg.plan.port_a = 1;
    cfg.plan.port_b = 2;
    if (fitted) {
      cfg.sorter->phase_error = kOamSortPhaseError;
      cfg.detection.accidental_rate = kOamSortAccidentals;
      cfg.source.phase_coherence = kOamSortCoherence;
    }
  } else if (name == "pbs-oam-ent") {
    cfg.paths = 2;
    cfg.source.pump_oam = 1;
    cfg.source.collinear = true;
    cfg.source.path = 0;
    cfg.pipeline = {spec("pbs", {{"path_a", 0}, {"path_b", 1}})};
    cfg.plan.port_a = 0;
    cfg.plan.port_b = 1;
    cfg.plan.pairing = 1;
    if (fitted) {
      // Reduced basis: l = 2 (even) and l = 1 (odd) on the transmitted H
      // photon; their conservation partners 0 and -1 on the reflected one.
      cfg.plan.analyzer = Analyzer::Kind::kOamReduced;
      cfg.plan.reduced_even_a = 2;
      cfg.plan.reduced_odd_a = 1;
      cfg.plan.reduced_even_b = 0;
      cfg.plan.reduced_odd_b = -1;
      cfg.detection.accidental_rate = kPbsAccidentals;
      cfg.source.phase_coherence = kPbsCoherence;
    } else {
      cfg.plan.analyzer = Analyzer::Kind::kOamFull;
    }
  } else {
    throw std::domain_error("unknown preset '" + name + "'");
  }
  set_chsh_for_sign(cfg);
  return cfg;
}

Element build_element(const ElementSpec& s, const ModeSpace& space, const std::optional<SorterConfig>& sorter) {
  if (s.kind == "hwp") return hwp<double>(space, deg(s.get("angle_deg")), s.path("path"));
  if (s.kind == "polarizer") return polarizer<double>(space, deg(s.get("angle_deg")), s.path("path"));
  if (s.kind == "dove_prism") return dove_prism<double>(space, deg(s.get("angle_deg")), s.path("path"));
  if (s.kind == "beam_splitter")
    return beam_splitter<double>(space, s.path("path_a"), s.path("path_b"), s.get("reflectivity"));
  if (s.kind == "pbs") return pbs<double>(space, s.path("path_a"), s.path("path_b"));
  if (s.kind == "mirror") return mirror<double>(space, s.path("path_a"), s.path("path_b"));
  if (s.kind == "phase_shift") return phase_shift<double>(space, s.get("phase_rad"), s.path("path"));
  if (s.kind == "sorter")
    return build_even_odd_sorter<double>(sorter.value_or(SorterConfig{}),
                                         SorterPorts{s.path("in"), s.path("port_e"), s.path("port_o")}, space);
  throw std::domain_error("unknown element kind '" + s.kind + "'");
}

Element pipeline_transfer(const ExperimentConfig& cfg) {
  const ModeSpace space = cfg.space();
  std::vector<Element> chain;
  chain.reserve(cfg.pipeline.size());
  for (const auto& s : cfg.pipeline) chain.push_back(build_element(s, space, cfg.sorter));
  return compose<double>(space, chain);
}

Ensemble<double> propagate(const ExperimentConfig& cfg) {
  const ModeSpace space = cfg.space();
  const Element t = pipeline_transfer(cfg);
  Ensemble<double> out;
  const bool unitary = is_unitary<double>(t.matrix);
  for (const auto& member : build_spdc_ensemble<double>(cfg.source, space)) {
    if (unitary) {
      out.push_back({member.weight, apply_unitary(member.state, t.matrix)});
      continue;
    }
    // Lossy chain: propagate the bosonic state and carry the survival
    // probability in the weight.
    const Matrix moved = t.matrix * member.state.symmetrized() * t.matrix.transpose();
    const double survival = moved.squaredNorm();
    if (survival > 1e-12) out.push_back({member.weight * survival, State(space, moved)});
  }
  if (out.empty()) throw std::runtime_error("propagate: no photon pair survives the pipeline");
  return out;
}

BasisVisibility basis_visibility(const std::vector<ScanResult>& scans, double offset_deg) {
  BasisVisibility b;
  double var = 0;
  for (const auto& s : scans) {
    double r = std::fmod(s.theta1_deg, 90.0);
    if (r < 0) r += 90;
    if (std::abs(r - offset_deg) > 1e-9 && std::abs(r - offset_deg - 90) > 1e-9) continue;
    b.value += s.fit.visibility;
    var += s.fit.sigma * s.fit.sigma;
    ++b.curves;
  }
  if (b.curves > 0) {
    b.value /= b.curves;
    b.sigma = std::sqrt(var) / b.curves;
  }
  return b;
}

ResultSet run(const ExperimentConfig& cfg, Mode mode) {
  cfg.detection.validate();
  ResultSet r;
  r.name = cfg.name;
  r.config_hash = config_hash(cfg);
  r.seed = cfg.detection.seed;
  r.mode = mode;

  const Ensemble<double> out = propagate(cfg);
  const PreparedEnsemble prepared = prepare(out);
  const Analyzer a = cfg.plan.analyzer_a();
  const Analyzer b = cfg.plan.analyzer_b();
  int next_index = 0;

  if (cfg.plan.scans) {
    const auto grid = angle_grid(cfg.plan.theta2_start_deg, cfg.plan.theta2_stop_deg, cfg.plan.theta2_steps);
    for (double t1 : cfg.plan.theta1_deg) {
      r.scans.push_back(scan_curve(prepared, a, b, t1, grid, cfg.detection, mode, next_index));
      next_index += static_cast<int>(grid.size());
    }
    r.hv = basis_visibility(r.scans, 0);
    r.da = basis_visibility(r.scans, 45);
  }
  if (cfg.plan.bell) r.chsh = chsh_S(prepared, a, b, cfg.plan.chsh, cfg.detection, mode, next_index);
  if (cfg.plan.chart) {
    const SorterConfig sc = cfg.sorter.value_or(SorterConfig{});
    r.chart = sorter_verification_chart(cfg.source.pump_oam, cfg.source.spectrum, sc, cfg.source.truncation);
    for (const auto& s : cfg.pipeline) {
      if (s.kind != "sorter") continue;
      PortPairProbabilities total;
      for (const auto& m : out) {
        const auto p = port_pair_probabilities(m.state, s.path("port_e"), s.path("port_o"));
        total.both_even += m.weight * p.both_even;
        total.both_odd += m.weight * p.both_odd;
        total.split += m.weight * p.split;
      }
      r.port_pairs = total;
      break;
    }
  }
  return r;
}

ImperfectionFit fit_imperfections(ExperimentConfig cfg, double target_hv, double target_da) {
  if (!(target_hv > 0 && target_hv < 1) || !(target_da > 0 && target_da <= target_hv))
    throw std::invalid_argument("fit_imperfections: targets must satisfy 0 < da <= hv < 1");
  cfg.plan.bell = false;
  cfg.plan.chart = false;
  cfg.plan.scans = true;

  const auto eval = [&](double rate, double coherence) {
    cfg.detection.accidental_rate = rate;
    cfg.source.phase_coherence = coherence;
    const ResultSet r = run(cfg, Mode::kAnalytic);
    return std::pair{r.hv.value, r.da.value};
  };

  double lo = 0;
  double hi = cfg.detection.pair_rate * 1e-3;
  if (eval(lo, 1).first < target_hv) throw std::runtime_error("fit_imperfections: HV target above noiseless value");
  while (eval(hi, 1).first > target_hv) {
    hi *= 2;
    if (hi > 1e6 * cfg.detection.pair_rate) throw std::runtime_error("fit_imperfections: accidental rate diverged");
  }
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid, 1).first > target_hv ? lo : hi) = mid;
  }
  const double rate = 0.5 * (lo + hi);

  double clo = 0;
  double chi = 1;
  if (eval(rate, 1).second < target_da) throw std::runtime_error("fit_imperfections: DA target not reachable");
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (clo + chi);
    (eval(rate, mid).second > target_da ? chi : clo) = mid;
  }
  ImperfectionFit fit;
  fit.accidental_rate = rate;
  fit.phase_coherence = 0.5 * (clo + chi);
  std::tie(fit.hv, fit.da) = eval(fit.accidental_rate, fit.phase_coherence);
  return fit;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // FNV-1a over the canonical YAML rendering.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_yaml(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace biphoton
