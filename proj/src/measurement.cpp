#include "biphoton/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace biphoton {

void DetectionModel::validate() const {
  if (!(pair_rate >= 0)) throw std::domain_error("detection: pair_rate must be >= 0");
  if (!(integration_time >= 0)) throw std::domain_error("detection: integration_time must be >= 0");
  if (!(accidental_rate >= 0)) throw std::domain_error("detection: accidental_rate must be >= 0");
  if (!(efficiency_a >= 0 && efficiency_a <= 1) || !(efficiency_b >= 0 && efficiency_b <= 1))
    throw std::domain_error("detection: efficiencies must lie in [0, 1]");
}

Matrix Analyzer::projector(const ModeSpace& space, double hwp_angle) const {
  switch (kind) {
    case Kind::kPolarization:
      // HWP(t) Pol(0) HWP(t) is the polarizer at 2t.
      return restrict_to_path<double>(space, polarizer<double>(space, 2 * hwp_angle, port), port).matrix;
    case Kind::kOamReduced: {
      if (even_l % 2 != 0 || odd_l % 2 == 0)
        throw std::domain_error("analyzer: reduced basis needs an even and an odd OAM value");
      OamProjector proj;
      proj.path = port;
      proj.coefficients = {{even_l, std::cos(2 * hwp_angle)}, {odd_l, std::sin(2 * hwp_angle)}};
      return restrict_to_path<double>(space, oam_projector<double>(space, proj), port).matrix;
    }
    case Kind::kOamFull:
      return restrict_to_path<double>(space, even_odd_projector<double>(space, 2 * hwp_angle, pairing, port), port)
          .matrix;
  }
  throw std::logic_error("analyzer: unknown kind");
}

PreparedEnsemble prepare(const Ensemble<double>& ensemble) {
  if (ensemble.empty()) throw std::domain_error("prepare: empty ensemble");
  PreparedEnsemble out{ensemble.front().state.space(), {}, {}};
  for (const auto& member : ensemble) {
    if (!(member.state.space() == out.space)) throw std::domain_error("prepare: ensemble members differ in space");
    out.weights.push_back(member.weight);
    out.symmetric.push_back(member.state.symmetrized());
  }
  return out;
}

PreparedEnsemble prepare(const State& state) { return prepare(Ensemble<double>{{1.0, state}}); }

double coincidence_probability(const PreparedEnsemble& ens, const Matrix& pa, const Matrix& pb) {
  const int d = ens.space.dim();
  if (pa.rows() != d || pb.rows() != d) throw std::domain_error("coincidence_probability: projector dimension mismatch");
  // Detector projectors live on one port; work on their supports only.
  const auto support = [d](const Matrix& m) {
    std::vector<int> idx;
    for (int i = 0; i < d; ++i)
      if (m.row(i).squaredNorm() > 0 || m.col(i).squaredNorm() > 0) idx.push_back(i);
    return idx;
  };
  const auto ia = support(pa);
  const auto ib = support(pb);
  if (ia.empty() || ib.empty()) return 0;
  const Matrix sa = pa(ia, ia);
  const Matrix sb = pb(ib, ib);
  double p = 0;
  for (std::size_t k = 0; k < ens.symmetric.size(); ++k)
    p += ens.weights[k] * 2.0 * (sa * ens.symmetric[k](ia, ib) * sb.transpose()).squaredNorm();
  return std::clamp(p, 0.0, 1.0);
}

double coincidence_probability(const State& state, const Matrix& pa, const Matrix& pb) {
  return coincidence_probability(prepare(state), pa, pb);
}

std::uint64_t setting_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(master), std::uint32_t(master >> 32), std::uint32_t(index),
                    std::uint32_t(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t(out[0]) << 32) | out[1];
}

std::int64_t sample_counts(double p, const DetectionModel& model, std::uint64_t setting_index) {
  const double mean = model.mean_counts(p);
  if (!(mean > 0)) return 0;
  std::mt19937_64 rng(setting_seed(model.seed, setting_index));
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

SinusoidFit visibility(std::span<const double> theta_deg, std::span<const double> y,
                       std::optional<std::span<const double>> variances) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (theta_deg.size() != y.size()) throw std::invalid_argument("visibility: angle and value counts differ");
  if (n < 3) throw std::invalid_argument("visibility: at least three points are needed");
  if (variances && variances->size() != y.size()) throw std::invalid_argument("visibility: variance count differs");

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = 4.0 * deg(theta_deg[i]);
    x(i, 0) = 1;
    x(i, 1) = std::cos(t);
    x(i, 2) = std::sin(t);
    v(i) = y[i];
    if (variances) w(i) = 1.0 / std::max((*variances)[i], 1e-300);
  }
  const Eigen::MatrixXd normal = x.transpose() * w.asDiagonal() * x;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14))
    throw std::runtime_error("visibility: degenerate angle grid");
  const Eigen::Vector3d beta = ldlt.solve(x.transpose() * w.asDiagonal() * v);

  SinusoidFit fit;
  fit.offset = beta(0);
  if (!(fit.offset > 0)) throw std::runtime_error("visibility: fitted offset is not positive");
  fit.amplitude = std::hypot(beta(1), beta(2));
  fit.phase = std::atan2(beta(2), beta(1));
  fit.visibility = std::clamp(fit.amplitude / fit.offset, 0.0, 1.0);
  if (variances) {
    const Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());
    Eigen::Vector3d g;
    const double a = fit.offset;
    const double b = fit.amplitude;
    if (b > 0) g << -b / (a * a), beta(1) / (a * b), beta(2) / (a * b);
    else g << 0, 1 / a, 0;
    fit.sigma = std::sqrt(std::max(0.0, g.dot(cov * g)));
  }
  return fit;
}

double raw_visibility(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("raw_visibility: empty curve");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (!(*hi + *lo > 0)) throw std::runtime_error("raw_visibility: curve has no counts");
  return (*hi - *lo) / (*hi + *lo);
}

double ScanPoint::sigma_counts() const {
  if (counts) return std::sqrt(std::max<double>(double(*counts), 1.0));
  return std::sqrt(std::max(mean_counts, 0.0));
}

ScanResult scan_curve(const PreparedEnsemble& ens, const Analyzer& a, const Analyzer& b, double theta1_deg,
                      std::span<const double> theta2_deg, const DetectionModel& model, Mode mode,
                      int first_setting_index) {
  if (a.port == b.port) throw std::domain_error("scan_curve: analyzers must sit at distinct ports");
  model.validate();
  ScanResult result;
  result.theta1_deg = theta1_deg;
  const Matrix pa = a.projector(ens.space, deg(theta1_deg) / 2);
  std::vector<double> y;
  std::vector<double> var;
  int idx = first_setting_index;
  for (double t2 : theta2_deg) {
    ScanPoint pt;
    pt.setting_index = idx;
    pt.theta1_deg = theta1_deg;
    pt.theta2_deg = t2;
    pt.analytic_p = coincidence_probability(ens, pa, b.projector(ens.space, deg(t2))) * a.efficiency * b.efficiency;
    pt.mean_counts = model.mean_counts(pt.analytic_p);
    if (mode == Mode::kSampled) pt.counts = sample_counts(pt.analytic_p, model, std::uint64_t(idx));
    y.push_back(pt.observed());
    var.push_back(std::max(pt.observed(), 1.0));
    result.points.push_back(pt);
    ++idx;
  }
  if (mode == Mode::kSampled) result.fit = visibility(theta2_deg, y, std::span<const double>(var));
  else result.fit = visibility(theta2_deg, y);
  return result;
}

std::vector<double> angle_grid(double start_deg, double stop_deg, int steps) {
  if (steps < 2) throw std::invalid_argument("angle_grid: at least two steps are needed");
  std::vector<double> g(steps);
  for (int i = 0; i < steps; ++i) g[i] = start_deg + (stop_deg - start_deg) * i / (steps - 1);
  return g;
}

Correlation correlation_E(double c_ab, double c_abp, double c_apb, double c_apbp) {
  const std::array<double, 4> c{c_ab, c_abp, c_apb, c_apbp};
  const std::array<double, 4> sign{+1, -1, -1, +1};
  double sum = 0;
  double num = 0;
  for (int i = 0; i < 4; ++i) {
    if (c[i] < 0) throw std::invalid_argument("correlation_E: negative count");
    sum += c[i];
    num += sign[i] * c[i];
  }
  if (!(sum > 0)) throw std::runtime_error("correlation_E: no counts");
  Correlation e;
  e.value = num / sum;
  double var = 0;
  for (int i = 0; i < 4; ++i) var += (sign[i] - e.value) * (sign[i] - e.value) * c[i];
  e.sigma = std::sqrt(var) / sum;
  return e;
}

ChshResult chsh_S(const PreparedEnsemble& ens, const Analyzer& a, const Analyzer& b, const ChshSettings& settings,
                  const DetectionModel& model, Mode mode, int first_setting_index) {
  if (a.port == b.port) throw std::domain_error("chsh_S: analyzers must sit at distinct ports");
  model.validate();
  const auto& s = settings.hwp_deg;
  const std::array<std::pair<double, double>, 4> pairs{{{s[0], s[2]}, {s[0], s[3]}, {s[1], s[2]}, {s[1], s[3]}}};
  ChshResult r;
  int idx = first_setting_index;
  for (int k = 0; k < 4; ++k) {
    const auto [x, y] = pairs[k];
    // Orthogonal outcome: wave plate rotated by 45 degrees.
    const std::array<std::pair<double, double>, 4> combos{{{x, y}, {x, y + 45}, {x + 45, y}, {x + 45, y + 45}}};
    for (int c = 0; c < 4; ++c) {
      const double p = coincidence_probability(ens, a.projector(ens.space, deg(combos[c].first)),
                                               b.projector(ens.space, deg(combos[c].second))) *
                       a.efficiency * b.efficiency;
      r.counts[4 * k + c] =
          mode == Mode::kSampled ? double(sample_counts(p, model, std::uint64_t(idx))) : model.mean_counts(p);
      ++idx;
    }
    r.correlations[k] = correlation_E(r.counts[4 * k], r.counts[4 * k + 1], r.counts[4 * k + 2], r.counts[4 * k + 3]);
  }
  const auto& e = r.correlations;
  r.S = std::abs(e[0].value - e[1].value + e[2].value + e[3].value);
  double var = 0;
  for (const auto& c : e) var += c.sigma * c.sigma;
  r.sigma_S = std::sqrt(var);
  return r;
}

}  // namespace biphoton
