#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "biphoton/experiments.hpp"
#include "biphoton/io.hpp"

#include <numbers>

using namespace biphoton;

namespace {

constexpr double kTsirelson = 2 * std::numbers::sqrt2;

double curve_visibility(const ResultSet& r, double theta1) {
  for (const auto& s : r.scans)
    if (s.theta1_deg == theta1) return s.fit.visibility;
  FAIL("no curve at theta1 = " << theta1);
  return 0;
}

}  // namespace

TEST_CASE("every preset builds, validates and runs") {
  for (const auto& name : preset_names()) {
    for (auto f : {Fidelity::kIdeal, Fidelity::kFitted}) {
      const auto cfg = preset(name, f);
      CHECK(validate_config(cfg).empty());
      CHECK_NOTHROW(run(cfg, Mode::kAnalytic));
    }
  }
  CHECK_THROWS_AS(preset("nope"), std::domain_error);
}

TEST_CASE("ideal presets are maximally entangled") {
  for (const char* name : {"noncollinear-pol", "oamsort-pol-ent", "pbs-oam-ent"}) {
    const auto r = run(preset(name), Mode::kAnalytic);
    CHECK(r.hv.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.da.value == doctest::Approx(1.0).epsilon(1e-6));
    REQUIRE(r.chsh);
    CHECK(r.chsh->S == doctest::Approx(kTsirelson).epsilon(1e-6));
  }
}

TEST_CASE("pipeline propagation is norm preserving for unitary chains") {
  const auto cfg = preset("oamsort-pol-ent");
  const auto ens = propagate(cfg);
  double w = 0;
  for (const auto& m : ens) w += m.weight;
  CHECK(w == doctest::Approx(1.0));
  CHECK(is_unitary<double>(pipeline_transfer(cfg).matrix));
}

TEST_CASE("lossy pipelines carry the survival probability") {
  auto cfg = preset("noncollinear-pol");
  cfg.pipeline.push_back({"polarizer", {{"angle_deg", 0}, {"path", 0}}});
  const auto ens = propagate(cfg);
  double w = 0;
  for (const auto& m : ens) w += m.weight;
  CHECK(w == doctest::Approx(0.5));
}

TEST_CASE("unknown element kinds are named") {
  auto cfg = preset("noncollinear-pol");
  cfg.pipeline.push_back({"flux_capacitor", {}});
  CHECK_THROWS_WITH_AS(pipeline_transfer(cfg), doctest::Contains("flux_capacitor"), std::domain_error);
}

TEST_CASE("reduced OAM basis: E and O curves differ once background is present") {
  const auto r = run(preset("pbs-oam-ent", Fidelity::kFitted), Mode::kAnalytic);
  const double e = curve_visibility(r, 0);
  const double o = curve_visibility(r, 90);
  CHECK(std::abs(e - o) > 1e-3);
}

TEST_CASE("full even/odd projectors give equal E and O visibilities") {
  auto cfg = preset("pbs-oam-ent", Fidelity::kFitted);
  cfg.plan.analyzer = Analyzer::Kind::kOamFull;
  const auto r = run(cfg, Mode::kAnalytic);
  CHECK(std::abs(curve_visibility(r, 0) - curve_visibility(r, 90)) < 1e-6);
  CHECK(std::abs(curve_visibility(r, 45) - curve_visibility(r, 135)) < 1e-6);
}

TEST_CASE("visibility falls monotonically with the sorter phase error") {
  auto cfg = preset("oamsort-pol-ent");
  cfg.detection.accidental_rate = 500;
  cfg.plan.bell = false;
  double last = 2;
  for (double d = 0; d <= 0.6 + 1e-12; d += 0.1) {
    cfg.sorter->phase_error = d;
    const auto r = run(cfg, Mode::kAnalytic);
    CHECK(r.hv.value <= last + 1e-12);
    last = r.hv.value;
  }
}

TEST_CASE("background raises curve minima") {
  auto cfg = preset("noncollinear-pol");
  cfg.plan.bell = false;
  double last = -1;
  for (double rate : {0.0, 100.0, 1000.0}) {
    cfg.detection.accidental_rate = rate;
    const auto r = run(cfg, Mode::kAnalytic);
    double lo = 1e300;
    for (const auto& p : r.scans.front().points) lo = std::min(lo, p.mean_counts);
    CHECK(lo > last);
    last = lo;
  }
}

TEST_CASE("S tracks 2 sqrt2 times the visibility for symmetric noise") {
  auto cfg = preset("noncollinear-pol");
  for (double rate : {300.0, 1500.0, 6000.0}) {
    cfg.detection.accidental_rate = rate;
    const auto r = run(cfg, Mode::kAnalytic);
    CHECK(r.hv.value == doctest::Approx(r.da.value).epsilon(1e-9));
    CHECK(std::abs(r.chsh->S - kTsirelson * r.hv.value) < 0.02);
  }
}

TEST_CASE("sorter-verify pairing pattern") {
  auto cfg = preset("sorter-verify");
  const auto r0 = run(cfg, Mode::kAnalytic);
  REQUIRE(r0.port_pairs);
  CHECK(r0.port_pairs->both_even + r0.port_pairs->both_odd >= 0.999);
  cfg.source.pump_oam = 1;
  const auto r1 = run(cfg, Mode::kAnalytic);
  REQUIRE(r1.port_pairs);
  REQUIRE(r1.chart);
  CHECK(r1.port_pairs->split >= 0.999);
  CHECK(r1.chart->columns() == 2 * cfg.source.truncation + 2);
}

TEST_CASE("runs are deterministic and carry provenance") {
  auto cfg = preset("noncollinear-pol", Fidelity::kFitted);
  cfg.detection.seed = 7;
  const auto a = run(cfg, Mode::kSampled);
  const auto b = run(cfg, Mode::kSampled);
  CHECK(summary_json(a).dump() == summary_json(b).dump());
  CHECK(a.seed == 7);
  CHECK(a.config_hash == config_hash(cfg));
  cfg.detection.seed = 8;
  CHECK(config_hash(cfg) != a.config_hash);
  CHECK(summary_json(run(cfg, Mode::kSampled)).dump() != summary_json(a).dump());
}

TEST_CASE("fitted constants reproduce the quoted visibilities") {
  const struct {
    const char* name;
    double hv, da;
  } cases[] = {{"noncollinear-pol", 0.964, 0.941}, {"oamsort-pol-ent", 0.775, 0.716}, {"pbs-oam-ent", 0.927, 0.809}};
  for (const auto& c : cases) {
    const auto r = run(preset(c.name, Fidelity::kFitted), Mode::kAnalytic);
    CHECK(r.hv.value == doctest::Approx(c.hv).epsilon(1e-6));
    CHECK(r.da.value == doctest::Approx(c.da).epsilon(1e-6));
  }
}

TEST_CASE("fit_imperfections recovers the stored noncollinear constants") {
  const auto cfg = preset("noncollinear-pol", Fidelity::kFitted);
  const auto f = fit_imperfections(cfg, 0.964, 0.941);
  CHECK(f.accidental_rate == doctest::Approx(cfg.detection.accidental_rate).epsilon(1e-9));
  CHECK(f.phase_coherence == doctest::Approx(cfg.source.phase_coherence).epsilon(1e-9));
  CHECK_THROWS_AS(fit_imperfections(cfg, 0.9, 0.95), std::invalid_argument);
}
