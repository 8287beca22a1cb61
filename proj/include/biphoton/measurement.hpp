#pragma once

// Coincidence detection, count sampling, fringe fits and CHSH estimation.

#include "biphoton/elements.hpp"
#include "biphoton/spdc.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace biphoton {

using Matrix = CMatrix<double>;

enum class Mode { kAnalytic, kSampled };

struct DetectionModel {
  double pair_rate = 1e5;         // pairs / s
  double integration_time = 10;   // s per setting
  double efficiency_a = 1;
  double efficiency_b = 1;
  double accidental_rate = 0;     // counts / s, added to every setting
  std::uint64_t seed = 1;

  double expected_pairs() const { return pair_rate * integration_time; }
  double accidental_counts() const { return accidental_rate * integration_time; }
  double mean_counts(double p) const {
    return p * pair_rate * efficiency_a * efficiency_b * integration_time + accidental_counts();
  }
  void validate() const;
};

/// Detector at one port: an angle-parametrized projector followed by a bucket
/// detector. The angle is a half-wave-plate setting; the projection angle is
/// twice that. For OAM analyzers |E> plays the role of H and |O> of V.
struct Analyzer {
  enum class Kind { kPolarization, kOamReduced, kOamFull };

  Kind kind = Kind::kPolarization;
  int port = 0;
  int even_l = 2;   // reduced basis: OAM value standing for |E>
  int odd_l = 1;    // reduced basis: OAM value standing for |O>
  int pairing = 1;  // full basis: j <-> pairing - j
  double efficiency = 1;

  Matrix projector(const ModeSpace& space, double hwp_angle) const;
};

/// Symmetrized, normalized bosonic amplitude matrices with weights.
struct PreparedEnsemble {
  ModeSpace space;
  std::vector<double> weights;
  std::vector<Matrix> symmetric;
};

PreparedEnsemble prepare(const Ensemble<double>& ensemble);
PreparedEnsemble prepare(const State& state);

/// Probability of one photon in the range of `pa` and the other in the range
/// of `pb`. The two projectors must act on disjoint subspaces.
double coincidence_probability(const PreparedEnsemble& ens, const Matrix& pa, const Matrix& pb);
double coincidence_probability(const State& state, const Matrix& pa, const Matrix& pb);

/// Per-setting seed derived from (master seed, setting index).
std::uint64_t setting_seed(std::uint64_t master, std::uint64_t index);

/// Poisson draw of mean model.mean_counts(p), seeded per setting.
std::int64_t sample_counts(double p, const DetectionModel& model, std::uint64_t setting_index);

struct SinusoidFit {
  double offset = 0;      // A
  double amplitude = 0;   // B
  double phase = 0;       // phi in A + B cos(4 theta - phi), radians
  double visibility = 0;
  double sigma = 0;
};

/// Least-squares fit of y = A + B cos(4 theta - phi). Without variances the
/// fit is unweighted and sigma is 0. Throws std::runtime_error when A <= 0.
SinusoidFit visibility(std::span<const double> theta_deg, std::span<const double> y,
                       std::optional<std::span<const double>> variances = std::nullopt);

/// (max - min) / (max + min).
double raw_visibility(std::span<const double> y);

struct ScanPoint {
  int setting_index = 0;
  double theta1_deg = 0;
  double theta2_deg = 0;
  double analytic_p = 0;
  double mean_counts = 0;
  std::optional<std::int64_t> counts;  // present in sampled mode

  double observed() const { return counts ? double(*counts) : mean_counts; }
  double sigma_counts() const;
};

struct ScanResult {
  double theta1_deg = 0;
  std::vector<ScanPoint> points;
  SinusoidFit fit;
};

/// The fixed arm is labelled by its projection angle theta1 (its wave plate
/// sits at theta1 / 2); the scanned arm by its wave-plate angle theta2.
ScanResult scan_curve(const PreparedEnsemble& ens, const Analyzer& a, const Analyzer& b, double theta1_deg,
                      std::span<const double> theta2_deg, const DetectionModel& model, Mode mode,
                      int first_setting_index = 0);

std::vector<double> angle_grid(double start_deg, double stop_deg, int steps);

struct Correlation {
  double value = 0;
  double sigma = 0;
};

/// E = (C(a,b) + C(a',b') - C(a,b') - C(a',b)) / sum, primes meaning
/// orthogonal outcomes. Sigma by first-order Poisson propagation.
Correlation correlation_E(double c_ab, double c_abp, double c_apb, double c_apbp);

struct ChshSettings {
  // Wave-plate angles in degrees: a, a', b, b'.
  std::array<double, 4> hwp_deg{0, 22.5, -11.25, -33.75};
};

struct ChshResult {
  std::array<double, 16> counts{};  // 4 setting pairs x (xy, xy', x'y, x'y')
  std::array<Correlation, 4> correlations;  // (a,b), (a,b'), (a',b), (a',b')
  double S = 0;
  double sigma_S = 0;
};

ChshResult chsh_S(const PreparedEnsemble& ens, const Analyzer& a, const Analyzer& b, const ChshSettings& settings,
                  const DetectionModel& model, Mode mode, int first_setting_index = 0);

}  // namespace biphoton
