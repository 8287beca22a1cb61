#pragma once

// Single-photon mode space (polarization x OAM x path) and the two-photon
// amplitude tensor. Storage keeps ordered photon slots; bosonic
// symmetrization is applied only when detection quantities are evaluated.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace biphoton {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

enum class Pol { H = 0, V = 1 };

inline char to_char(Pol p) { return p == Pol::H ? 'H' : 'V'; }

struct SingleMode {
  Pol pol = Pol::H;
  int l = 0;
  int path = 0;

  friend bool operator==(const SingleMode&, const SingleMode&) = default;
};

inline std::string to_string(const SingleMode& m) {
  return std::string(1, to_char(m.pol)) + ",l=" + std::to_string(m.l) + ",p=" + std::to_string(m.path);
}

/// Truncated mode space: OAM in [-L, L], `paths` spatial labels, two
/// polarizations. Index order is path-major, then polarization, then OAM.
class ModeSpace {
 public:
  ModeSpace(int truncation, int paths) : L_(truncation), paths_(paths) {
    if (truncation < 0) throw std::domain_error("ModeSpace: OAM truncation must be >= 0");
    if (paths < 1) throw std::domain_error("ModeSpace: at least one path label is required");
  }

  int truncation() const { return L_; }
  int paths() const { return paths_; }
  int oam_count() const { return 2 * L_ + 1; }
  int dim() const { return 2 * oam_count() * paths_; }

  bool contains(const SingleMode& m) const {
    return std::abs(m.l) <= L_ && m.path >= 0 && m.path < paths_;
  }
  bool contains_l(int l) const { return std::abs(l) <= L_; }

  int index(const SingleMode& m) const {
    if (std::abs(m.l) > L_)
      throw std::domain_error("mode_index: OAM " + std::to_string(m.l) + " outside [-" + std::to_string(L_) + ", " +
                              std::to_string(L_) + "]");
    if (m.path < 0 || m.path >= paths_)
      throw std::domain_error("mode_index: path " + std::to_string(m.path) + " outside [0, " + std::to_string(paths_) +
                              ")");
    return (m.path * 2 + static_cast<int>(m.pol)) * oam_count() + (m.l + L_);
  }

  SingleMode mode(int index) const {
    if (index < 0 || index >= dim()) throw std::domain_error("mode_index: index out of range");
    const int l = index % oam_count() - L_;
    const int rest = index / oam_count();
    return SingleMode{static_cast<Pol>(rest % 2), l, rest / 2};
  }

  friend bool operator==(const ModeSpace&, const ModeSpace&) = default;

 private:
  int L_;
  int paths_;
};

inline int mode_index(const SingleMode& m, const ModeSpace& space) { return space.index(m); }

template <typename Real>
Real normalization_tolerance() {
  return Real(1e-9);
}

/// Two-photon state. amp(i, j) is the amplitude for photon slot 1 in mode i
/// and slot 2 in mode j; sum |amp|^2 == 1.
template <typename Real>
class BiphotonState {
 public:
  using Matrix = CMatrix<Real>;

  BiphotonState(ModeSpace space, Matrix amp) : space_(space), amp_(std::move(amp)) {
    if (amp_.rows() != space_.dim() || amp_.cols() != space_.dim())
      throw std::domain_error("BiphotonState: amplitude shape does not match mode space");
    const Real n = amp_.norm();
    if (!(n > Real(0))) throw std::domain_error("BiphotonState: zero amplitude tensor");
    amp_ /= n;
  }

  static BiphotonState product(ModeSpace space, const SingleMode& a, const SingleMode& b) {
    Matrix m = Matrix::Zero(space.dim(), space.dim());
    m(space.index(a), space.index(b)) = Complex<Real>(1);
    return BiphotonState(space, std::move(m));
  }

  const ModeSpace& space() const { return space_; }
  const Matrix& amplitudes() const { return amp_; }
  Complex<Real> operator()(const SingleMode& a, const SingleMode& b) const {
    return amp_(space_.index(a), space_.index(b));
  }
  Real norm() const { return amp_.norm(); }

  /// Physical bosonic state: (amp + amp^T) normalized. Entry (a, b) is the
  /// amplitude of the ordered pair; unordered pair probabilities for a != b
  /// are 2 |psi(a, b)|^2.
  Matrix symmetrized() const {
    Matrix s = amp_ + amp_.transpose();
    const Real n = s.norm();
    if (!(n > Real(0))) throw std::domain_error("BiphotonState: amplitude is antisymmetric; no bosonic content");
    return s / n;
  }

 private:
  ModeSpace space_;
  Matrix amp_;
};

using State = BiphotonState<double>;

/// (U (x) U) applied to both photon slots.
template <typename Real>
BiphotonState<Real> apply_unitary(const BiphotonState<Real>& state, const CMatrix<Real>& u) {
  const int d = state.space().dim();
  if (u.rows() != d || u.cols() != d) throw std::domain_error("apply_unitary: operator dimension mismatch");
  CMatrix<Real> out = u * state.amplitudes() * u.transpose();
  return BiphotonState<Real>(state.space(), std::move(out));
}

/// (amp[A,B] + amp[B,A]) / sqrt(2).
template <typename Real>
Complex<Real> coincidence_amplitude(const BiphotonState<Real>& state, const SingleMode& a, const SingleMode& b) {
  if (a == b) throw std::domain_error("coincidence_amplitude: identical modes request a bunching amplitude");
  const auto& sp = state.space();
  const int ia = sp.index(a);
  const int ib = sp.index(b);
  return (state.amplitudes()(ia, ib) + state.amplitudes()(ib, ia)) / std::sqrt(Real(2));
}

enum class SlotPolicy { kFirst, kSecond, kBoth };

template <typename Real>
struct Projection {
  std::optional<BiphotonState<Real>> state;
  Real probability = 0;
};

template <typename Real>
bool is_projector(const CMatrix<Real>& p, Real tol = Real(1e-9)) {
  return p.rows() == p.cols() && (p * p - p).norm() <= tol * std::max<Real>(1, p.norm()) &&
         (p.adjoint() - p).norm() <= tol * std::max<Real>(1, p.norm());
}

/// Applies a projector to one or both slots and renormalizes. A probability at
/// or below 1e-12 is reported as a null outcome with no state.
template <typename Real>
Projection<Real> project_and_renormalize(const BiphotonState<Real>& state, const CMatrix<Real>& projector,
                                         SlotPolicy policy) {
  const int d = state.space().dim();
  if (projector.rows() != d || projector.cols() != d)
    throw std::domain_error("project_and_renormalize: operator dimension mismatch");
  if (!is_projector<Real>(projector)) throw std::domain_error("project_and_renormalize: operator is not a projector");

  CMatrix<Real> out;
  switch (policy) {
    case SlotPolicy::kFirst: out = projector * state.amplitudes(); break;
    case SlotPolicy::kSecond: out = state.amplitudes() * projector.transpose(); break;
    case SlotPolicy::kBoth: out = projector * state.amplitudes() * projector.transpose(); break;
  }
  Projection<Real> result;
  result.probability = std::min<Real>(Real(1), out.squaredNorm());
  if (result.probability > Real(1e-12)) result.state.emplace(state.space(), std::move(out));
  return result;
}

}  // namespace biphoton
