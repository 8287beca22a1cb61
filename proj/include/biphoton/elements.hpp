#pragma once

// Single-photon optical elements as dense operators on a ModeSpace.
// Angles are radians here; degrees only at the config/CLI boundary.
//
// Conventions:
//   beam splitter  [[sqrt(t), i sqrt(r)], [i sqrt(r), sqrt(t)]] on (a, b)
//   PBS            H transmitted, V reflected with phase i
//   Dove prism     |l> -> exp(2 i l alpha) |-l>, polarization untouched
// Every element acts as the identity outside the paths it names.

#include "biphoton/hilbert.hpp"

#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace biphoton {

enum class ElementKind {
  kIdentity,
  kHalfWavePlate,
  kPolarizer,
  kDovePrism,
  kBeamSplitter,
  kPolarizingBeamSplitter,
  kMirror,
  kPhaseShift,
  kOamProjector,
  kEvenOddProjector,
  kPathProjector,
  kComposite,
};

inline bool is_projector_kind(ElementKind k) {
  return k == ElementKind::kPolarizer || k == ElementKind::kOamProjector || k == ElementKind::kEvenOddProjector ||
         k == ElementKind::kPathProjector;
}

template <typename Real>
struct ElementUnitary {
  ElementKind kind = ElementKind::kIdentity;
  CMatrix<Real> matrix;

  bool projector() const { return is_projector_kind(kind); }
  int dim() const { return static_cast<int>(matrix.rows()); }
};

using Element = ElementUnitary<double>;

namespace detail {

inline void check_path(const ModeSpace& space, int path, const char* what) {
  if (path < 0 || path >= space.paths())
    throw std::domain_error(std::string(what) + ": path " + std::to_string(path) + " not in mode space");
}

template <typename Real>
CMatrix<Real> identity(const ModeSpace& space) {
  return CMatrix<Real>::Identity(space.dim(), space.dim());
}

// Writes a 2x2 polarization block into every OAM value of `path`.
template <typename Real>
void set_pol_block(CMatrix<Real>& m, const ModeSpace& space, int path, const Eigen::Matrix<Complex<Real>, 2, 2>& j) {
  const int L = space.truncation();
  for (int l = -L; l <= L; ++l) {
    const int h = space.index({Pol::H, l, path});
    const int v = space.index({Pol::V, l, path});
    m(h, h) = j(0, 0);
    m(h, v) = j(0, 1);
    m(v, h) = j(1, 0);
    m(v, v) = j(1, 1);
  }
}

}  // namespace detail

template <typename Real>
ElementUnitary<Real> identity_element(const ModeSpace& space) {
  return {ElementKind::kIdentity, detail::identity<Real>(space)};
}

/// Half-wave plate with fast axis at `theta`: Jones matrix
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
template <typename Real>
ElementUnitary<Real> hwp(const ModeSpace& space, Real theta, int path) {
  detail::check_path(space, path, "hwp");
  const Real c = std::cos(2 * theta);
  const Real s = std::sin(2 * theta);
  Eigen::Matrix<Complex<Real>, 2, 2> j;
  j << c, s, s, -c;
  CMatrix<Real> m = detail::identity<Real>(space);
  detail::set_pol_block(m, space, path, j);
  return {ElementKind::kHalfWavePlate, std::move(m)};
}

/// Projects the photon on `path` onto cos(theta) H + sin(theta) V.
template <typename Real>
ElementUnitary<Real> polarizer(const ModeSpace& space, Real theta, int path) {
  detail::check_path(space, path, "polarizer");
  const Real c = std::cos(theta);
  const Real s = std::sin(theta);
  Eigen::Matrix<Complex<Real>, 2, 2> j;
  j << c * c, c * s, c * s, s * s;
  CMatrix<Real> m = detail::identity<Real>(space);
  detail::set_pol_block(m, space, path, j);
  return {ElementKind::kPolarizer, std::move(m)};
}

template <typename Real>
ElementUnitary<Real> dove_prism(const ModeSpace& space, Real alpha, int path) {
  detail::check_path(space, path, "dove_prism");
  CMatrix<Real> m = detail::identity<Real>(space);
  const int L = space.truncation();
  for (Pol p : {Pol::H, Pol::V}) {
    for (int l = -L; l <= L; ++l) {
      const int in = space.index({p, l, path});
      m(in, in) = 0;
    }
    for (int l = -L; l <= L; ++l) {
      const int in = space.index({p, l, path});
      const int out = space.index({p, -l, path});
      m(out, in) = std::polar(Real(1), 2 * Real(l) * alpha);
    }
  }
  return {ElementKind::kDovePrism, std::move(m)};
}

namespace detail {

// Embeds a 2x2 path operator acting on (a, b), identity on internal modes.
template <typename Real>
CMatrix<Real> path_pair_operator(const ModeSpace& space, int a, int b, const Eigen::Matrix<Complex<Real>, 2, 2>& t,
                                 std::optional<Pol> only) {
  CMatrix<Real> m = identity<Real>(space);
  const int L = space.truncation();
  for (Pol p : {Pol::H, Pol::V}) {
    if (only && *only != p) continue;
    for (int l = -L; l <= L; ++l) {
      const int ia = space.index({p, l, a});
      const int ib = space.index({p, l, b});
      m(ia, ia) = t(0, 0);
      m(ia, ib) = t(0, 1);
      m(ib, ia) = t(1, 0);
      m(ib, ib) = t(1, 1);
    }
  }
  return m;
}

inline void check_pair(const ModeSpace& space, int a, int b, const char* what) {
  check_path(space, a, what);
  check_path(space, b, what);
  if (a == b) throw std::domain_error(std::string(what) + ": path labels must differ");
}

}  // namespace detail

template <typename Real>
ElementUnitary<Real> beam_splitter(const ModeSpace& space, int path_a, int path_b, Real reflectivity) {
  detail::check_pair(space, path_a, path_b, "beam_splitter");
  if (!(reflectivity >= 0 && reflectivity <= 1)) throw std::domain_error("beam_splitter: reflectivity outside [0, 1]");
  const Complex<Real> t(std::sqrt(1 - reflectivity), 0);
  const Complex<Real> r(0, std::sqrt(reflectivity));
  Eigen::Matrix<Complex<Real>, 2, 2> b;
  b << t, r, r, t;
  return {ElementKind::kBeamSplitter, detail::path_pair_operator<Real>(space, path_a, path_b, b, std::nullopt)};
}

template <typename Real>
ElementUnitary<Real> pbs(const ModeSpace& space, int path_a, int path_b) {
  detail::check_pair(space, path_a, path_b, "pbs");
  Eigen::Matrix<Complex<Real>, 2, 2> b;
  const Complex<Real> i(0, 1);
  b << Complex<Real>(0), i, i, Complex<Real>(0);
  return {ElementKind::kPolarizingBeamSplitter, detail::path_pair_operator<Real>(space, path_a, path_b, b, Pol::V)};
}

/// Swaps path labels a and b without touching polarization or OAM.
template <typename Real>
ElementUnitary<Real> mirror(const ModeSpace& space, int path_a, int path_b) {
  detail::check_pair(space, path_a, path_b, "mirror");
  Eigen::Matrix<Complex<Real>, 2, 2> b;
  b << Complex<Real>(0), Complex<Real>(1), Complex<Real>(1), Complex<Real>(0);
  return {ElementKind::kMirror, detail::path_pair_operator<Real>(space, path_a, path_b, b, std::nullopt)};
}

template <typename Real>
ElementUnitary<Real> phase_shift(const ModeSpace& space, Real phase, int path) {
  detail::check_path(space, path, "phase_shift");
  CMatrix<Real> m = detail::identity<Real>(space);
  const Complex<Real> f = std::polar(Real(1), phase);
  for (Pol p : {Pol::H, Pol::V})
    for (int l = -space.truncation(); l <= space.truncation(); ++l) {
      const int i = space.index({p, l, path});
      m(i, i) = f;
    }
  return {ElementKind::kPhaseShift, std::move(m)};
}

/// Projector onto a superposition of OAM values on one path, as realized by
/// phase flattening plus single-mode fiber coupling.
struct OamProjector {
  std::vector<std::pair<int, std::complex<double>>> coefficients;
  int path = 0;
  std::optional<Pol> pol;  // nullopt: polarization-agnostic
  double efficiency = 1.0;
};

namespace detail {

// Identity with the block of one path cleared.
template <typename Real>
CMatrix<Real> identity_without_path(const ModeSpace& space, int path) {
  CMatrix<Real> m = identity<Real>(space);
  for (int i = 0; i < space.dim(); ++i)
    if (space.mode(i).path == path) m(i, i) = 0;
  return m;
}

}  // namespace detail

/// Rank-1 (per polarization) projector on `proj.path`; identity elsewhere.
template <typename Real>
ElementUnitary<Real> oam_projector(const ModeSpace& space, const OamProjector& proj) {
  detail::check_path(space, proj.path, "oam_projector");
  if (proj.coefficients.empty()) throw std::domain_error("oam_projector: empty coefficient list");
  double norm2 = 0;
  for (const auto& [l, c] : proj.coefficients) {
    if (!space.contains_l(l)) throw std::domain_error("oam_projector: OAM " + std::to_string(l) + " outside truncation");
    norm2 += std::norm(c);
  }
  if (!(norm2 > 0)) throw std::domain_error("oam_projector: zero coefficient vector");
  CMatrix<Real> m = detail::identity_without_path<Real>(space, proj.path);
  for (Pol p : {Pol::H, Pol::V}) {
    if (proj.pol && *proj.pol != p) continue;
    CVector<Real> u = CVector<Real>::Zero(space.dim());
    for (const auto& [l, c] : proj.coefficients)
      u(space.index({p, l, proj.path})) += Complex<Real>(Real(c.real()), Real(c.imag())) / Real(std::sqrt(norm2));
    m += u * u.adjoint();
  }
  return {ElementKind::kOamProjector, std::move(m)};
}

/// Full even/odd parity-qubit projector on one path. OAM values pair as
/// j <-> pairing - j (j even); each pair is one level of the qubit and the
/// projector selects cos(phi)|j> + sin(phi)|pairing - j> in every level.
/// Modes whose partner falls outside the truncation are not detected.
template <typename Real>
ElementUnitary<Real> even_odd_projector(const ModeSpace& space, Real phi, int pairing, int path) {
  detail::check_path(space, path, "even_odd_projector");
  if (pairing % 2 == 0) throw std::domain_error("even_odd_projector: pairing offset must be odd");
  CMatrix<Real> m = detail::identity_without_path<Real>(space, path);
  const int L = space.truncation();
  for (Pol p : {Pol::H, Pol::V}) {
    for (int j = -L; j <= L; ++j) {
      if (j % 2 != 0 || !space.contains_l(pairing - j)) continue;
      CVector<Real> u = CVector<Real>::Zero(space.dim());
      u(space.index({p, j, path})) = std::cos(phi);
      u(space.index({p, pairing - j, path})) = std::sin(phi);
      m += u * u.adjoint();
    }
  }
  return {ElementKind::kEvenOddProjector, std::move(m)};
}

/// Projector onto every mode of one path. Unlike the beam-line projectors it
/// blocks all other paths.
template <typename Real>
ElementUnitary<Real> path_projector(const ModeSpace& space, int path) {
  detail::check_path(space, path, "path_projector");
  CMatrix<Real> m = detail::identity<Real>(space) - detail::identity_without_path<Real>(space, path);
  return {ElementKind::kPathProjector, std::move(m)};
}

/// Restricts an element to the subspace of one path (detector subspace).
template <typename Real>
ElementUnitary<Real> restrict_to_path(const ModeSpace& space, const ElementUnitary<Real>& e, int path) {
  detail::check_path(space, path, "restrict_to_path");
  // P M P with a diagonal 0/1 projector P is a mask on rows and columns.
  CMatrix<Real> m = e.matrix;
  for (int i = 0; i < space.dim(); ++i) {
    if (space.mode(i).path == path) continue;
    m.row(i).setZero();
    m.col(i).setZero();
  }
  return {e.projector() ? e.kind : ElementKind::kComposite, std::move(m)};
}

/// Product of elements listed in traversal order: the first element acts
/// first, so it is the rightmost factor.
template <typename Real>
ElementUnitary<Real> compose(const ModeSpace& space, std::span<const ElementUnitary<Real>> chain) {
  CMatrix<Real> m = detail::identity<Real>(space);
  for (const auto& e : chain) {
    if (e.dim() != space.dim()) throw std::domain_error("compose: element dimension mismatch");
    m = e.matrix * m;
  }
  return {chain.size() == 1 ? chain.front().kind : ElementKind::kComposite, std::move(m)};
}

template <typename Real>
bool is_unitary(const CMatrix<Real>& u, Real tol = Real(1e-9)) {
  return u.rows() == u.cols() && (u.adjoint() * u - CMatrix<Real>::Identity(u.rows(), u.cols())).norm() <= tol;
}

template <typename Real>
constexpr Real deg(Real degrees) {
  return degrees * std::numbers::pi_v<Real> / Real(180);
}

}  // namespace biphoton
