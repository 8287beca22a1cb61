#include "biphoton/cli.hpp"

#include "biphoton/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace biphoton::cli {

namespace {

// A validation failure: reported with exit code 1.
struct Invalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Manifest {
  std::string preset;
  bool fitted = false;
  std::string config;
  std::string mode = "analytic";
  std::optional<std::uint64_t> seed;
  std::optional<int> pump_oam;
  std::string out;
  std::vector<std::string> sets;
};

void add_source_flags(CLI::App& cmd, Manifest& m) {
  auto* p = cmd.add_option("--preset", m.preset, "Named experiment preset");
  auto* c = cmd.add_option("--config", m.config, "Experiment config file (YAML)");
  p->excludes(c);
  cmd.add_flag("--fitted", m.fitted, "Use the fitted-imperfection variant of the preset");
}

void add_run_flags(CLI::App& cmd, Manifest& m) {
  add_source_flags(cmd, m);
  cmd.add_option("--mode", m.mode, "analytic or sampled")->check(CLI::IsMember({"analytic", "sampled"}));
  cmd.add_option("--seed", m.seed, "Master seed for sampled counts");
  cmd.add_option("--pump-oam", m.pump_oam, "Override the pump OAM");
  cmd.add_option("--out", m.out, "Output directory");
  cmd.add_option("--set", m.sets, "Override a config key: key=value")->allow_extra_args(false);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Invalid("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string base_yaml(const Manifest& m) {
  if (!m.config.empty()) return read_text(m.config);
  if (m.preset.empty()) throw Invalid("one of --preset or --config is required");
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), m.preset) == names.end())
    throw Invalid("unknown preset '" + m.preset + "'");
  return to_yaml(preset(m.preset, m.fitted ? Fidelity::kFitted : Fidelity::kIdeal));
}

std::string override_or_invalid(const std::string& text, const std::string& key, const std::string& value) {
  try {
    return apply_override(text, key, value);
  } catch (const std::domain_error& e) {
    throw Invalid(e.what());
  }
}

// Resolved YAML text after all overrides.
std::string resolve(const Manifest& m) {
  std::string text = base_yaml(m);
  if (m.seed) text = override_or_invalid(text, "detection.seed", std::to_string(*m.seed));
  if (m.pump_oam) text = override_or_invalid(text, "source.pump_oam", std::to_string(*m.pump_oam));
  for (const auto& kv : m.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Invalid("--set expects key=value, got '" + kv + "'");
    text = override_or_invalid(text, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return text;
}

ExperimentConfig checked_config(const std::string& text) {
  const auto findings = validate_config_text(text);
  if (!findings.empty()) {
    std::string msg = "config has " + std::to_string(findings.size()) + " problem(s):";
    for (const auto& f : findings) msg += "\n  - " + f;
    throw Invalid(msg);
  }
  return config_from_yaml(text);
}

std::string output_dir(const Manifest& m, const std::string& name) {
  if (!m.out.empty()) return m.out;
  const char* root = std::getenv(kOutputRootEnv);
  return (std::filesystem::path(root && *root ? root : "results") / name).string();
}

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Invalid("output directory '" + dir + "' is not writable");
  const auto probe = std::filesystem::path(dir) / ".write_probe";
  if (!std::ofstream(probe)) throw Invalid("output directory '" + dir + "' is not writable");
  std::filesystem::remove(probe, ec);
}

Mode parse_mode(const std::string& s) { return s == "sampled" ? Mode::kSampled : Mode::kAnalytic; }

int cmd_run(const Manifest& m, std::ostream& out) {
  const std::string text = resolve(m);
  const ExperimentConfig cfg = checked_config(text);
  const std::string dir = output_dir(m, cfg.name);
  ensure_writable(dir);
  const ResultSet r = run(cfg, parse_mode(m.mode));
  const auto files = write_result_set(dir, r, cfg);
  out << summary_json(r).dump(2) << '\n';
  out << "wrote " << files.size() << " files to " << dir << '\n';
  return kExitOk;
}

int cmd_scan(const Manifest& m, const std::string& key, double from, double to, int steps, std::ostream& out) {
  if (steps < 1 || from > to || (steps > 1 && from == to))
    throw Invalid("scan: empty range for '" + key + "'");
  const std::string text = resolve(m);
  const ExperimentConfig base = checked_config(text);
  if (!base.plan.scans) throw Invalid("scan: the experiment has no polarization or OAM scans to evaluate");
  const std::string dir = output_dir(m, base.name);
  ensure_writable(dir);

  std::ostringstream csv;
  csv << "value,V_HV,sigma_HV,V_DA,sigma_DA,S,sigma_S,min_mean_counts\n";
  for (int i = 0; i < steps; ++i) {
    const double v = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    const ExperimentConfig cfg = checked_config(override_or_invalid(text, key, format_double(v)));
    const ResultSet r = run(cfg, parse_mode(m.mode));
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& s : r.scans)
      for (const auto& p : s.points) floor = std::min(floor, p.observed());
    csv << format_double(v) << ',' << format_double(r.hv.value) << ',' << format_double(r.hv.sigma) << ','
        << format_double(r.da.value) << ',' << format_double(r.da.sigma) << ','
        << (r.chsh ? format_double(r.chsh->S) : "") << ',' << (r.chsh ? format_double(r.chsh->sigma_S) : "") << ','
        << format_double(floor) << '\n';
  }
  std::string name = key;
  std::replace(name.begin(), name.end(), '.', '_');
  const auto path = std::filesystem::path(dir) / ("scan_" + name + ".csv");
  std::ofstream(path) << csv.str();
  out << csv.str() << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_validate(const Manifest& m, std::ostream& out) {
  std::vector<std::string> findings;
  try {
    findings = validate_config_text(resolve(m));
  } catch (const Invalid& e) {
    findings.emplace_back(e.what());
  }
  for (const auto& f : findings) out << "invalid: " << f << '\n';
  out << findings.size() << " finding(s)\n";
  return findings.empty() ? kExitOk : kExitInvalid;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biphoton polarization-OAM experiment simulator", "biphoton"};
  app.require_subcommand(1);

  Manifest run_m;
  auto* run_cmd = app.add_subcommand("run", "Run a preset or config and write results");
  add_run_flags(*run_cmd, run_m);

  Manifest scan_m;
  std::string key;
  double from = 0;
  double to = 0;
  int steps = 0;
  auto* scan_cmd = app.add_subcommand("scan", "Sweep one config key and tabulate visibilities and S");
  add_run_flags(*scan_cmd, scan_m);
  scan_cmd->add_option("--param", key, "Dotted config key to sweep")->required();
  scan_cmd->add_option("--from", from, "First value")->required();
  scan_cmd->add_option("--to", to, "Last value")->required();
  scan_cmd->add_option("--steps", steps, "Number of values")->required();

  Manifest val_m;
  auto* val_cmd = app.add_subcommand("validate", "List every invariant violation of a config");
  add_source_flags(*val_cmd, val_m);
  val_cmd->add_option("--set", val_m.sets, "Override a config key: key=value");

  std::string show_name;
  bool show_fitted = false;
  auto* show_cmd = app.add_subcommand("show-preset", "Print a preset as a config file");
  show_cmd->add_option("name", show_name)->required();
  show_cmd->add_flag("--fitted", show_fitted);

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(run_m, out);
    if (*scan_cmd) return cmd_scan(scan_m, key, from, to, steps, out);
    if (*val_cmd) return cmd_validate(val_m, out);
    if (*show_cmd) {
      Manifest m;
      m.preset = show_name;
      m.fitted = show_fitted;
      out << base_yaml(m);
      return kExitOk;
    }
  } catch (const Invalid& e) {
    err << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    err << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace biphoton::cli
