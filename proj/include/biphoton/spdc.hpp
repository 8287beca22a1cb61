#pragma once

// Type-II SPDC biphoton source with a pump-OAM spiral spectrum.

#include "biphoton/hilbert.hpp"

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace biphoton {

/// Spiral-spectrum model for the amplitudes c_m of |m>_H |l_p - m>_V.
struct SpectrumModel {
  enum class Kind { kUniformBand, kGaussianEnvelope, kExplicit };

  Kind kind = Kind::kGaussianEnvelope;
  // Gaussian envelope: |c_m|^2 ~ exp(-(m - center)^2 / (2 width^2)).
  // An unset center means l_p / 2.
  std::optional<double> center;
  double width = 1.5;
  // Uniform band: equal amplitude for m in [band_min, band_max].
  int band_min = 0;
  int band_max = 0;
  // Explicit: (m, c_m) pairs; unnormalized input is accepted.
  std::vector<std::pair<int, std::complex<double>>> weights;

  static SpectrumModel gaussian(double width = 1.5, std::optional<double> center = std::nullopt) {
    SpectrumModel s;
    s.kind = Kind::kGaussianEnvelope;
    s.width = width;
    s.center = center;
    return s;
  }
  static SpectrumModel uniform(int lo, int hi) {
    SpectrumModel s;
    s.kind = Kind::kUniformBand;
    s.band_min = lo;
    s.band_max = hi;
    return s;
  }
  static SpectrumModel explicit_list(std::vector<std::pair<int, std::complex<double>>> w) {
    SpectrumModel s;
    s.kind = Kind::kExplicit;
    s.weights = std::move(w);
    return s;
  }
};

struct SpdcConfig {
  int pump_oam = 1;
  bool collinear = true;
  SpectrumModel spectrum;
  int truncation = 5;
  // Relative sign of the second polarization term, |H>_i|V>_s +- |V>_i|H>_s.
  int phase_sign = +1;
  // Coherence of that relative phase in [0, 1]; below 1 the source is a
  // two-member mixture with phases +-acos(coherence), which scales the
  // interference term by exactly `phase_coherence`.
  double phase_coherence = 1.0;
  int path = 0;         // collinear output path
  int idler_path = 0;   // non-collinear k_i
  int signal_path = 1;  // non-collinear k_s
};

/// Spectrum amplitudes indexed by m + L, m in [-L, L]. Entries whose partner
/// l_p - m falls outside [-L, L] are zero. Normalized to sum |c_m|^2 = 1.
std::vector<std::complex<double>> spectrum_weights(const SpectrumModel& model, int pump_oam, int truncation);

/// Builds the pure state for a given extra phase on the second polarization
/// term (on top of phase_sign).
template <typename Real>
BiphotonState<Real> build_spdc_state(const SpdcConfig& cfg, const ModeSpace& space, Real extra_phase = Real(0));

template <typename Real>
struct WeightedState {
  Real weight;
  BiphotonState<Real> state;
};

template <typename Real>
using Ensemble = std::vector<WeightedState<Real>>;

/// The source as an ensemble of pure states (one member when fully coherent).
template <typename Real>
Ensemble<Real> build_spdc_ensemble(const SpdcConfig& cfg, const ModeSpace& space);

/// Populations of the H-V coincident part by OAM parity of each photon.
struct ParityWeights {
  double even_h_odd_v = 0;
  double odd_h_even_v = 0;
  double even_h_even_v = 0;
  double odd_h_odd_v = 0;

  double total() const { return even_h_odd_v + odd_h_even_v + even_h_even_v + odd_h_odd_v; }
};

template <typename Real>
ParityWeights even_odd_decompose(const BiphotonState<Real>& state);

/// Schmidt coefficients of the parity-coarse-grained pair (H-photon parity,
/// V-photon parity): singular values of [[sqrt P_EE, sqrt P_EO],
/// [sqrt P_OE, sqrt P_OO]] normalized by the H-V population. Exact when only
/// one parity sector is populated, which OAM conservation guarantees.
template <typename Real>
std::array<double, 2> parity_schmidt_coefficients(const BiphotonState<Real>& state);

// ---------------------------------------------------------------------------

namespace detail {
inline bool is_even(int l) { return l % 2 == 0; }
}  // namespace detail

template <typename Real>
BiphotonState<Real> build_spdc_state(const SpdcConfig& cfg, const ModeSpace& space, Real extra_phase) {
  if (space.truncation() < cfg.truncation)
    throw std::domain_error("build_spdc_state: mode space truncation smaller than source truncation");
  if (cfg.phase_sign != 1 && cfg.phase_sign != -1) throw std::domain_error("build_spdc_state: phase_sign must be +-1");
  const auto check = [&](int p) {
    if (p < 0 || p >= space.paths()) throw std::domain_error("build_spdc_state: source path outside mode space");
  };
  const auto c = spectrum_weights(cfg.spectrum, cfg.pump_oam, cfg.truncation);
  const int L = cfg.truncation;
  const Complex<Real> second = Real(cfg.phase_sign) * std::polar(Real(1), extra_phase);

  CMatrix<Real> amp = CMatrix<Real>::Zero(space.dim(), space.dim());
  if (cfg.collinear) {
    check(cfg.path);
    // Slot 1 carries the H photon. The "second" polarization term of the
    // labelled form is the one with odd OAM on the H photon.
    for (int m = -L; m <= L; ++m) {
      const auto cm = c[m + L];
      if (cm == std::complex<double>(0)) continue;
      const Complex<Real> w(Real(cm.real()), Real(cm.imag()));
      amp(space.index({Pol::H, m, cfg.path}), space.index({Pol::V, cfg.pump_oam - m, cfg.path})) =
          detail::is_even(m) ? w : w * second;
    }
  } else {
    check(cfg.idler_path);
    check(cfg.signal_path);
    if (cfg.idler_path == cfg.signal_path)
      throw std::domain_error("build_spdc_state: non-collinear source needs distinct idler and signal paths");
    const Real r = Real(1) / std::sqrt(Real(2));
    for (int m = -L; m <= L; ++m) {
      const auto cm = c[m + L];
      if (cm == std::complex<double>(0)) continue;
      const Complex<Real> w(Real(cm.real()) * r, Real(cm.imag()) * r);
      const int l2 = cfg.pump_oam - m;
      amp(space.index({Pol::H, m, cfg.idler_path}), space.index({Pol::V, l2, cfg.signal_path})) = w;
      amp(space.index({Pol::V, m, cfg.idler_path}), space.index({Pol::H, l2, cfg.signal_path})) = w * second;
    }
  }
  return BiphotonState<Real>(space, std::move(amp));
}

template <typename Real>
Ensemble<Real> build_spdc_ensemble(const SpdcConfig& cfg, const ModeSpace& space) {
  if (!(cfg.phase_coherence >= 0 && cfg.phase_coherence <= 1))
    throw std::domain_error("build_spdc_ensemble: phase_coherence outside [0, 1]");
  Ensemble<Real> out;
  if (cfg.phase_coherence >= 1) {
    out.push_back({Real(1), build_spdc_state<Real>(cfg, space)});
    return out;
  }
  const Real a = std::acos(Real(cfg.phase_coherence));
  out.push_back({Real(0.5), build_spdc_state<Real>(cfg, space, a)});
  out.push_back({Real(0.5), build_spdc_state<Real>(cfg, space, -a)});
  return out;
}

template <typename Real>
ParityWeights even_odd_decompose(const BiphotonState<Real>& state) {
  const auto& sp = state.space();
  const CMatrix<Real> s = state.symmetrized();
  ParityWeights w;
  for (int a = 0; a < sp.dim(); ++a) {
    const SingleMode ma = sp.mode(a);
    if (ma.pol != Pol::H) continue;
    for (int b = 0; b < sp.dim(); ++b) {
      const SingleMode mb = sp.mode(b);
      if (mb.pol != Pol::V) continue;
      const double p = 2.0 * double(std::norm(s(a, b)));
      const bool eh = detail::is_even(ma.l);
      const bool ev = detail::is_even(mb.l);
      if (eh && !ev) w.even_h_odd_v += p;
      else if (!eh && ev) w.odd_h_even_v += p;
      else if (eh && ev) w.even_h_even_v += p;
      else w.odd_h_odd_v += p;
    }
  }
  return w;
}

template <typename Real>
std::array<double, 2> parity_schmidt_coefficients(const BiphotonState<Real>& state) {
  const ParityWeights w = even_odd_decompose(state);
  const double t = w.total();
  if (!(t > 0)) throw std::domain_error("parity_schmidt_coefficients: no H-V coincident population");
  Eigen::Matrix2d m;
  m << std::sqrt(w.even_h_even_v / t), std::sqrt(w.even_h_odd_v / t), std::sqrt(w.odd_h_even_v / t),
      std::sqrt(w.odd_h_odd_v / t);
  const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix2d>(m).singularValues();
  return {sv(0), sv(1)};
}

}  // namespace biphoton
