#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "biphoton/cli.hpp"
#include "biphoton/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace biphoton;
namespace fs = std::filesystem;

namespace {

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli call(std::vector<std::string> args) {
  args.insert(args.begin(), "biphoton");
  std::ostringstream out, err;
  Cli r;
  r.code = cli::main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("biphoton_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config YAML round trip") {
  for (const auto& name : preset_names()) {
    for (auto f : {Fidelity::kIdeal, Fidelity::kFitted}) {
      const auto cfg = preset(name, f);
      const auto text = to_yaml(cfg);
      const auto back = config_from_yaml(text);
      CHECK(to_yaml(back) == text);
      CHECK(config_hash(back) == config_hash(cfg));
    }
  }
}

TEST_CASE("explicit spectra survive the round trip") {
  auto cfg = preset("pbs-oam-ent");
  cfg.source.spectrum = SpectrumModel::explicit_list({{0, {0.6, 0.1}}, {1, 0.8}});
  const auto back = config_from_yaml(to_yaml(cfg));
  REQUIRE(back.source.spectrum.weights.size() == 2);
  CHECK(back.source.spectrum.weights[0].second == std::complex<double>(0.6, 0.1));
}

TEST_CASE("overrides") {
  const auto text = to_yaml(preset("oamsort-pol-ent"));
  const auto changed = config_from_yaml(apply_override(text, "sorter.phase_error_rad", "0.25"));
  CHECK(changed.sorter->phase_error == doctest::Approx(0.25));
  const auto el = config_from_yaml(apply_override(text, "pipeline.0.in", "0"));
  CHECK(el.pipeline[0].params.at("in") == 0);
  CHECK_THROWS_AS(apply_override(text, "sorter.warp_factor", "9"), std::domain_error);
  CHECK_THROWS_AS(apply_override(text, "pipeline.9.in", "0"), std::domain_error);
}

TEST_CASE("validation findings") {
  const auto text = to_yaml(preset("oamsort-pol-ent"));
  CHECK(validate_config_text(text).empty());

  const auto bad_r = validate_config_text(apply_override(text, "sorter.reflectivity", "1.2"));
  REQUIRE(bad_r.size() >= 1);
  CHECK(bad_r.front().find("reflectivity") != std::string::npos);

  const auto bad_kind = validate_config_text(apply_override(text, "pipeline.0.kind", "warp_drive"));
  REQUIRE(bad_kind.size() == 1);
  CHECK(bad_kind.front().find("warp_drive") != std::string::npos);

  std::string several = apply_override(text, "plan.port_b", "1");
  several = apply_override(several, "source.phase_coherence", "2");
  several = apply_override(several, "plan.theta1_deg", "[0, 720]");
  CHECK(validate_config_text(several).size() == 3);

  CHECK_FALSE(validate_config_text(text + "bogus: 1\n").empty());
  CHECK_FALSE(validate_config_text("source: [unclosed").empty());
}

TEST_CASE("scan CSV round trip") {
  const auto r = run(preset("noncollinear-pol", Fidelity::kFitted), Mode::kSampled);
  std::ostringstream os;
  write_scan_csv(os, r.scans.front());
  CHECK(os.str().rfind(kScanCsvHeader, 0) == 0);
  std::istringstream is(os.str());
  const auto pts = read_scan_csv(is);
  REQUIRE(pts.size() == r.scans.front().points.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].setting_index == r.scans.front().points[i].setting_index);
    CHECK(pts[i].analytic_p == r.scans.front().points[i].analytic_p);
    CHECK(pts[i].counts == r.scans.front().points[i].counts);
  }
  std::istringstream bad("a,b,c\n");
  CHECK_THROWS_AS(read_scan_csv(bad), std::runtime_error);
}

TEST_CASE("CHSH and chart CSV round trips") {
  const auto cfg = preset("pbs-oam-ent", Fidelity::kFitted);
  const auto r = run(cfg, Mode::kAnalytic);
  std::ostringstream os;
  write_chsh_csv(os, *r.chsh, cfg.plan.chsh);
  std::istringstream is(os.str());
  const auto back = read_chsh_csv(is);
  CHECK(back.S == r.chsh->S);
  CHECK(back.counts == r.chsh->counts);

  auto sv = preset("sorter-verify");
  sv.source.pump_oam = 1;
  const auto chart = *run(sv, Mode::kAnalytic).chart;
  std::ostringstream cs;
  write_chart_csv(cs, chart);
  std::istringstream ci(cs.str());
  const auto c2 = read_chart_csv(ci);
  CHECK(c2.first_l == chart.first_l);
  CHECK(c2.rows == chart.rows);
}

TEST_CASE("cli run writes re-parseable files") {
  const auto dir = scratch("run");
  const auto r = call({"run", "--preset", "noncollinear-pol", "--mode", "analytic", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["visibility"]["HV"]["visibility"].get<double>() == doctest::Approx(1.0));
  CHECK(summary["chsh"]["S"].get<double>() == doctest::Approx(2.8284).epsilon(1e-4));
  CHECK_NOTHROW(load_config((dir / "config.yaml").string()));
  int curves = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename().string().rfind("curve_", 0) != 0) continue;
    std::ifstream in(e.path());
    CHECK(read_scan_csv(in).size() == 37);
    ++curves;
  }
  CHECK(curves == 4);
  std::ifstream chsh(dir / "chsh.csv");
  CHECK(read_chsh_csv(chsh).S == doctest::Approx(2.8284).epsilon(1e-4));
}

TEST_CASE("cli sorter chart layout") {
  const auto dir = scratch("chart");
  REQUIRE(call({"run", "--preset", "sorter-verify", "--pump-oam", "1", "--out", dir.string()}).code == 0);
  std::ifstream in(dir / "chart.csv");
  const auto chart = read_chart_csv(in);
  CHECK(chart.columns() == 12);
  CHECK(chart.rows[0].size() == 12);
}

TEST_CASE("cli determinism with a config file and seed") {
  const auto cfg_path = scratch("custom.yaml");
  std::ofstream(cfg_path) << to_yaml(preset("oamsort-pol-ent", Fidelity::kFitted));
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const auto& d : {a, b})
    REQUIRE(call({"run", "--config", cfg_path.string(), "--seed", "7", "--mode", "sampled", "--out", d.string()}).code ==
            0);
  for (const auto& e : fs::directory_iterator(a)) CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
}

TEST_CASE("cli exit codes") {
  CHECK(call({"run"}).code == cli::kExitInvalid);
  CHECK(call({"run", "--preset", "nope"}).code == cli::kExitInvalid);
  CHECK(call({"run", "--preset", "noncollinear-pol", "--set", "sorter.x=1"}).code == cli::kExitInvalid);
  CHECK(call({"run", "--preset", "noncollinear-pol", "--set", "plan.port_b=0", "--out", scratch("x").string()}).code ==
        cli::kExitInvalid);
  CHECK(call({"validate", "--preset", "oamsort-pol-ent"}).code == cli::kExitOk);
  const auto v = call({"validate", "--preset", "oamsort-pol-ent", "--set", "sorter.reflectivity=1.2"});
  CHECK(v.code == cli::kExitInvalid);
  CHECK(v.out.find("reflectivity") != std::string::npos);
  // Analytic curve at zero counts cannot be fitted.
  const auto z = call({"run", "--preset", "noncollinear-pol", "--set", "detection.pair_rate=0", "--out",
                       scratch("zero").string()});
  CHECK(z.code == cli::kExitRuntime);
  CHECK(call({"show-preset", "pbs-oam-ent"}).out.find("analyzer: oam-full") != std::string::npos);
}

TEST_CASE("cli scan") {
  const auto dir = scratch("scan");
  const auto r = call({"scan", "--preset", "oamsort-pol-ent", "--set", "detection.accidental_rate=500", "--param",
                       "sorter.phase_error_rad", "--from", "0", "--to", "0.6", "--steps", "7", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "scan_sorter_phase_error_rad.csv");
  std::string line;
  std::getline(in, line);
  double last = 2;
  int rows = 0;
  while (std::getline(in, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    CHECK(v <= last + 1e-12);
    last = v;
    ++rows;
  }
  CHECK(rows == 7);
  CHECK(call({"scan", "--preset", "oamsort-pol-ent", "--param", "sorter.phase_error_rad", "--from", "1", "--to", "0",
              "--steps", "3", "--out", dir.string()})
            .code == cli::kExitInvalid);
  CHECK(call({"scan", "--preset", "oamsort-pol-ent", "--param", "sorter.phase_error_rad", "--from", "0", "--to", "1",
              "--steps", "0", "--out", dir.string()})
            .code == cli::kExitInvalid);
}

TEST_CASE("default output root comes from the environment") {
  const auto root = scratch("envroot");
  ::setenv(cli::kOutputRootEnv, root.string().c_str(), 1);
  REQUIRE(call({"run", "--preset", "noncollinear-pol"}).code == 0);
  CHECK(fs::exists(root / "noncollinear-pol" / "summary.json"));
  ::unsetenv(cli::kOutputRootEnv);
}
