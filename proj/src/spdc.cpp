#include "biphoton/spdc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biphoton {

std::vector<std::complex<double>> spectrum_weights(const SpectrumModel& model, int pump_oam, int truncation) {
  if (truncation < 0) throw std::domain_error("spectrum_weights: negative truncation");
  if (pump_oam % 2 != 0 && truncation < 1)
    throw std::domain_error("spectrum_weights: odd pump OAM needs truncation >= 1");
  const int L = truncation;
  std::vector<std::complex<double>> c(2 * L + 1, 0.0);
  const auto admissible = [&](int m) { return std::abs(m) <= L && std::abs(pump_oam - m) <= L; };

  switch (model.kind) {
    case SpectrumModel::Kind::kGaussianEnvelope: {
      if (!(model.width > 0)) throw std::domain_error("spectrum_weights: gaussian width must be positive");
      const double center = model.center.value_or(0.5 * pump_oam);
      for (int m = -L; m <= L; ++m)
        if (admissible(m)) c[m + L] = std::exp(-(m - center) * (m - center) / (4.0 * model.width * model.width));
      break;
    }
    case SpectrumModel::Kind::kUniformBand:
      if (model.band_min > model.band_max) throw std::domain_error("spectrum_weights: empty uniform band");
      for (int m = model.band_min; m <= model.band_max; ++m)
        if (admissible(m)) c[m + L] = 1.0;
      break;
    case SpectrumModel::Kind::kExplicit:
      for (const auto& [m, w] : model.weights)
        if (admissible(m)) c[m + L] += w;
      break;
  }

  double n2 = 0;
  for (const auto& x : c) n2 += std::norm(x);
  if (!(n2 > 0))
    throw std::domain_error("spectrum_weights: no admissible OAM pair for pump OAM " + std::to_string(pump_oam));
  const double n = std::sqrt(n2);
  for (auto& x : c) x /= n;
  return c;
}

}  // namespace biphoton
