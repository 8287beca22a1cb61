#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "biphoton/measurement.hpp"
#include "support.hpp"

#include <numbers>

using namespace biphoton;

namespace {

const ModeSpace kTwo(1, 2);

// (|H>_0|V>_1 + sign |V>_0|H>_1)/sqrt2.
State bell(int sign) {
  SpdcConfig cfg;
  cfg.pump_oam = 0;
  cfg.collinear = false;
  cfg.truncation = 1;
  cfg.spectrum = SpectrumModel::uniform(0, 0);
  cfg.phase_sign = sign;
  return build_spdc_state<double>(cfg, kTwo);
}

Analyzer pol_at(int port) {
  Analyzer a;
  a.port = port;
  return a;
}

Matrix polarizer_at(int port, double theta_deg) {
  return restrict_to_path<double>(kTwo, polarizer<double>(kTwo, deg(theta_deg), port), port).matrix;
}

DetectionModel clean() {
  DetectionModel m;
  m.accidental_rate = 0;
  return m;
}

}  // namespace

TEST_CASE("coincidence probabilities of the polarization Bell state") {
  const State s = bell(+1);
  CHECK(coincidence_probability(s, polarizer_at(0, 0), polarizer_at(1, 90)) == doctest::Approx(0.5));
  CHECK(coincidence_probability(s, polarizer_at(0, 0), polarizer_at(1, 0)) == doctest::Approx(0.0));
  CHECK(coincidence_probability(s, polarizer_at(0, 45), polarizer_at(1, 45)) == doctest::Approx(0.5));
}

TEST_CASE("coincidence probability matches the density-matrix oracle") {
  std::mt19937_64 rng(21);
  const ModeSpace sp(1, 2);
  // Random rank-k projector supported on one path.
  const auto on_path = [&](int path, int k) {
    const Matrix p = path_projector<double>(sp, path).matrix;
    Eigen::HouseholderQR<Matrix> qr(p * test::random_matrix(sp.dim(), rng));
    const Matrix q = qr.householderQ() * Matrix::Identity(sp.dim(), sp.dim());
    // The first columns span the path subspace because p has rank dim/2.
    return Matrix(q.leftCols(k) * q.leftCols(k).adjoint());
  };
  for (int k = 0; k < 25; ++k) {
    const State s = test::random_state(sp, rng);
    const Matrix pa = on_path(0, 1 + k % 4);
    const Matrix pb = on_path(1, 1 + (k / 4) % 5);
    REQUIRE(is_projector<double>(pa));
    CHECK((pa * path_projector<double>(sp, 1).matrix).norm() < 1e-9);
    CHECK(coincidence_probability(s, pa, pb) == doctest::Approx(test::trace_oracle(s, pa, pb)).epsilon(1e-9));
  }
}

TEST_CASE("Poisson sampling") {
  DetectionModel m = clean();
  CHECK(sample_counts(0.0, m, 0) == 0);

  m.pair_rate = 1000;
  m.integration_time = 10;
  CHECK(m.mean_counts(1.0) == doctest::Approx(10000));
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto n = sample_counts(1.0, m, i);
    CHECK(std::abs(double(n) - 10000) < 500);
    CHECK(n == sample_counts(1.0, m, i));
  }
  CHECK(setting_seed(1, 2) != setting_seed(1, 3));
  CHECK(setting_seed(1, 2) != setting_seed(2, 2));

  DetectionModel bad;
  bad.efficiency_a = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("visibility fit") {
  const auto grid = angle_grid(0, 180, 37);
  SUBCASE("full-contrast sinusoid") {
    std::vector<double> y;
    for (double t : grid) y.push_back(1 + std::cos(4 * deg(t) - 0.3));
    const auto f = visibility(grid, y);
    CHECK(f.visibility == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.sigma == 0.0);
  }
  SUBCASE("constant curve") {
    std::vector<double> y(grid.size(), 5.0);
    CHECK(visibility(grid, y).visibility == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("synthetic V = 0.775 at 1e5 mean counts") {
    std::mt19937_64 rng(77);
    std::vector<double> y, var;
    for (double t : grid) {
      const double mean = 1e5 * (1 + 0.775 * std::cos(4 * deg(t)));
      std::poisson_distribution<long> d(mean);
      y.push_back(double(d(rng)));
      var.push_back(std::max(y.back(), 1.0));
    }
    const auto f = visibility(grid, y, std::span<const double>(var));
    CHECK(f.sigma > 0);
    CHECK(std::abs(f.visibility - 0.775) < 2 * f.sigma);
  }
  SUBCASE("errors") {
    std::vector<double> y(2, 1.0);
    CHECK_THROWS_AS(visibility(std::span(grid).first(2), y), std::invalid_argument);
    std::vector<double> neg(grid.size(), -1.0);
    CHECK_THROWS_AS(visibility(grid, neg), std::runtime_error);
  }
  CHECK(raw_visibility(std::vector<double>{0, 2, 1}) == doctest::Approx(1.0));
}

TEST_CASE("scan curves") {
  const auto prepared = prepare(bell(+1));
  const auto grid = angle_grid(0, 180, 37);
  const auto s0 = scan_curve(prepared, pol_at(0), pol_at(1), 0, grid, clean(), Mode::kAnalytic);
  // H at port 0 pairs with V at port 1: peaks at HWP2 = 45 and 135 degrees.
  double best = 0;
  double at = -1;
  for (const auto& p : s0.points)
    if (p.analytic_p > best + 1e-12) {
      best = p.analytic_p;
      at = p.theta2_deg;
    }
  CHECK(at == doctest::Approx(45.0));
  CHECK(s0.points[27].analytic_p == doctest::Approx(0.5));
  for (double t1 : {0.0, 45.0, 90.0, 135.0}) {
    const auto s = scan_curve(prepared, pol_at(0), pol_at(1), t1, grid, clean(), Mode::kAnalytic);
    CHECK(s.fit.visibility == doctest::Approx(1.0).epsilon(1e-6));
  }
  const auto sampled = scan_curve(prepared, pol_at(0), pol_at(1), 0, grid, clean(), Mode::kSampled, 100);
  CHECK(sampled.points.front().setting_index == 100);
  for (const auto& p : sampled.points) {
    REQUIRE(p.counts);
    CHECK(*p.counts >= 0);
  }
  CHECK_THROWS_AS(scan_curve(prepared, pol_at(0), pol_at(0), 0, grid, clean(), Mode::kAnalytic), std::domain_error);
}

TEST_CASE("correlation E") {
  CHECK(correlation_E(100, 0, 0, 100).value == doctest::Approx(1.0));
  CHECK(correlation_E(100, 0, 0, 100).sigma == doctest::Approx(0.0));
  CHECK(correlation_E(50, 50, 50, 50).value == doctest::Approx(0.0));
  CHECK(correlation_E(50, 50, 50, 50).sigma == doctest::Approx(0.5 / std::sqrt(50.0)));
  CHECK_THROWS_AS(correlation_E(0, 0, 0, 0), std::runtime_error);
}

TEST_CASE("CHSH") {
  const DetectionModel m = clean();
  SUBCASE("Tsirelson value for both Bell-state signs") {
    const auto plus = chsh_S(prepare(bell(+1)), pol_at(0), pol_at(1), ChshSettings{}, m, Mode::kAnalytic);
    CHECK(plus.S == doctest::Approx(2 * std::numbers::sqrt2).epsilon(1e-6));
    for (const auto& e : plus.correlations) CHECK(std::abs(e.value) == doctest::Approx(1 / std::numbers::sqrt2));
    ChshSettings minus;
    minus.hwp_deg = {0, 22.5, 11.25, 33.75};
    const auto r = chsh_S(prepare(bell(-1)), pol_at(0), pol_at(1), minus, m, Mode::kAnalytic);
    CHECK(r.S == doctest::Approx(2 * std::numbers::sqrt2).epsilon(1e-6));
  }
  SUBCASE("separable state stays within the local bound") {
    const State prod = State::product(kTwo, {Pol::H, 0, 0}, {Pol::V, 0, 1});
    for (double b : {0.0, 11.25, 30.0}) {
      ChshSettings s;
      s.hwp_deg = {0, 22.5, b, b + 22.5};
      CHECK(chsh_S(prepare(prod), pol_at(0), pol_at(1), s, m, Mode::kAnalytic).S <= 2.0 + 1e-12);
    }
  }
  SUBCASE("uncertainty is positive in sampled mode") {
    const auto r = chsh_S(prepare(bell(+1)), pol_at(0), pol_at(1), ChshSettings{}, m, Mode::kSampled);
    CHECK(r.sigma_S > 0);
    CHECK(std::abs(r.S - 2 * std::numbers::sqrt2) < 5 * r.sigma_S);
  }
}
