#pragma once

// Shared oracles for the unit tests.

#include "biphoton/hilbert.hpp"

#include <random>

namespace biphoton::test {

inline CMatrix<double> random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix<double> m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

// Haar-ish random unitary: Q of a complex Gaussian matrix.
inline CMatrix<double> random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix<double>> qr(random_matrix(n, rng));
  return qr.householderQ() * CMatrix<double>::Identity(n, n);
}

inline State random_state(const ModeSpace& space, std::mt19937_64& rng) {
  return State(space, random_matrix(space.dim(), rng));
}

// Orthogonal projector onto the span of k random vectors.
inline CMatrix<double> random_projector(int n, int k, std::mt19937_64& rng) {
  const CMatrix<double> u = random_unitary(n, rng);
  return u.leftCols(k) * u.leftCols(k).adjoint();
}

inline CMatrix<double> kron(const CMatrix<double>& a, const CMatrix<double>& b) {
  CMatrix<double> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// |psi> as a vector over ordered slot pairs (slot 1 major).
inline CVector<double> vec(const CMatrix<double>& amp) {
  CVector<double> v(amp.size());
  for (int i = 0; i < amp.rows(); ++i)
    for (int j = 0; j < amp.cols(); ++j) v(i * amp.cols() + j) = amp(i, j);
  return v;
}

// Density-matrix oracle: Tr[rho (PA (x) PB + PB (x) PA)] on the symmetric state.
inline double trace_oracle(const State& s, const CMatrix<double>& pa, const CMatrix<double>& pb) {
  const CVector<double> psi = vec(s.symmetrized());
  const CMatrix<double> rho = psi * psi.adjoint();
  const CMatrix<double> op = kron(pa, pb) + kron(pb, pa);
  return (rho * op).trace().real();
}

}  // namespace biphoton::test
