#pragma once

// Even/odd OAM sorter: Mach-Zehnder with a Dove prism in each arm. The
// folded geometry has the same logical action and is modeled unfolded.
//
//   in --mirror--> E --BS(E,O)--+-- Dove(0)                      --+--BS(E,O)--> E, O
//                               +-- Dove(alpha), phase phi0 + delta --+
//
// With r = 1/2 the port probabilities are
//   p_E(l) = t^2 + r^2 + 2rt cos(2 l alpha + delta + phi0 - pi),
// so phi0 = pi sends l = 0 to port E.

#include "biphoton/elements.hpp"
#include "biphoton/spdc.hpp"

#include <array>
#include <numbers>
#include <vector>

namespace biphoton {

struct SorterConfig {
  double relative_dove_angle = std::numbers::pi / 2;  // alpha, radians
  double phase_error = 0.0;                           // delta, radians
  double reflectivity = 0.5;
  double arm_phase = std::numbers::pi;  // phi0
  // Incoherent fraction of each port's singles that shows up in the other
  // port. Used by the routing probabilities and the chart only.
  double background_leak = 0.0;
};

struct SorterPorts {
  int in = 0;
  int even = 1;
  int odd = 2;
};

template <typename Real>
ElementUnitary<Real> build_even_odd_sorter(const SorterConfig& cfg, const SorterPorts& ports, const ModeSpace& space) {
  if (ports.in == ports.even || ports.in == ports.odd || ports.even == ports.odd)
    throw std::domain_error("build_even_odd_sorter: input, even and odd ports must be distinct paths");
  if (!(cfg.reflectivity >= 0 && cfg.reflectivity <= 1))
    throw std::domain_error("build_even_odd_sorter: reflectivity outside [0, 1]");
  if (!std::isfinite(cfg.relative_dove_angle) || !std::isfinite(cfg.phase_error) || !std::isfinite(cfg.arm_phase))
    throw std::domain_error("build_even_odd_sorter: non-finite phase");
  const Real r = Real(cfg.reflectivity);
  const std::array<ElementUnitary<Real>, 6> chain{
      mirror<Real>(space, ports.in, ports.even),
      beam_splitter<Real>(space, ports.even, ports.odd, r),
      dove_prism<Real>(space, Real(0), ports.even),
      dove_prism<Real>(space, Real(cfg.relative_dove_angle), ports.odd),
      phase_shift<Real>(space, Real(cfg.arm_phase + cfg.phase_error), ports.odd),
      beam_splitter<Real>(space, ports.even, ports.odd, r),
  };
  return compose<Real>(space, chain);
}

/// Closed-form port probabilities (p_E, p_O) for a photon of OAM l entering
/// the sorter. Leak mixes the two incoherently.
inline std::array<double, 2> port_routing_probability(int l, const SorterConfig& cfg) {
  const double r = cfg.reflectivity;
  const double t = 1 - r;
  const double phase = 2.0 * l * cfg.relative_dove_angle + cfg.phase_error + cfg.arm_phase - std::numbers::pi;
  const double pe = std::clamp(t * t + r * r + 2 * r * t * std::cos(phase), 0.0, 1.0);
  const double po = 1 - pe;
  const double k = cfg.background_leak;
  return {(1 - k) * pe + k * po, (1 - k) * po + k * pe};
}

/// Probabilities of both photons in E, both in O, and one in each.
struct PortPairProbabilities {
  double both_even = 0;
  double both_odd = 0;
  double split = 0;
};

template <typename Real>
PortPairProbabilities port_pair_probabilities(const BiphotonState<Real>& state, int port_even, int port_odd) {
  const auto& sp = state.space();
  const CMatrix<Real> s = state.symmetrized();
  PortPairProbabilities out;
  for (int a = 0; a < sp.dim(); ++a) {
    const int pa = sp.mode(a).path;
    for (int b = 0; b < sp.dim(); ++b) {
      const int pb = sp.mode(b).path;
      const double p = double(std::norm(s(a, b)));
      if (pa == port_even && pb == port_even) out.both_even += p;
      else if (pa == port_odd && pb == port_odd) out.both_odd += p;
      else if ((pa == port_even && pb == port_odd) || (pa == port_odd && pb == port_even)) out.split += p;
    }
  }
  return out;
}

/// Mean photon number per single mode of the symmetrized state.
template <typename Real>
std::vector<double> singles(const BiphotonState<Real>& state) {
  const CMatrix<Real> s = state.symmetrized();
  std::vector<double> n(s.rows());
  for (int a = 0; a < s.rows(); ++a) n[a] = 2.0 * double(s.row(a).squaredNorm());
  return n;
}

/// Per-port singles indexed by OAM: row 0 is port E, row 1 port O; columns
/// run over the source OAM values -L .. L + |l_p|. Both Dove prisms reverse
/// the OAM sign, so the photon detected at -l is booked under column l.
struct SortingChart {
  int first_l = 0;
  std::array<std::vector<double>, 2> rows;

  int columns() const { return static_cast<int>(rows[0].size()); }
  double at(int port, int l) const { return rows[port].at(l - first_l); }
};

/// Chart normalized to the (E, l = 0) cell of the Gaussian-pump (l_p = 0)
/// chart built from the same spectrum model.
SortingChart sorter_verification_chart(int pump_oam, const SpectrumModel& spectrum, const SorterConfig& cfg,
                                       int truncation);

/// Unnormalized chart: mean singles per cell.
SortingChart sorter_singles_chart(int pump_oam, const SpectrumModel& spectrum, const SorterConfig& cfg,
                                  int truncation);

}  // namespace biphoton
