#include "biphoton/sorter.hpp"

#include <algorithm>

namespace biphoton {

SortingChart sorter_singles_chart(int pump_oam, const SpectrumModel& spectrum, const SorterConfig& cfg,
                                  int truncation) {
  const ModeSpace space(truncation, 3);
  const SorterPorts ports{0, 1, 2};
  SpdcConfig src;
  src.pump_oam = pump_oam;
  src.collinear = true;
  src.spectrum = spectrum;
  src.truncation = truncation;
  src.path = ports.in;

  const auto sorter = build_even_odd_sorter<double>(cfg, ports, space);
  const auto out = apply_unitary(build_spdc_state<double>(src, space), sorter.matrix);
  const auto n = singles(out);

  SortingChart chart;
  chart.first_l = -truncation;
  const int cols = 2 * truncation + 1 + std::abs(pump_oam);
  chart.rows[0].assign(cols, 0.0);
  chart.rows[1].assign(cols, 0.0);
  for (int i = 0; i < space.dim(); ++i) {
    const SingleMode m = space.mode(i);
    const int row = m.path == ports.even ? 0 : m.path == ports.odd ? 1 : -1;
    if (row < 0) continue;
    const int col = -m.l - chart.first_l;
    if (col >= 0 && col < cols) chart.rows[row][col] += n[i];
  }
  if (cfg.background_leak > 0) {
    const double k = cfg.background_leak;
    for (int c = 0; c < cols; ++c) {
      const double e = chart.rows[0][c];
      const double o = chart.rows[1][c];
      chart.rows[0][c] = (1 - k) * e + k * o;
      chart.rows[1][c] = (1 - k) * o + k * e;
    }
  }
  return chart;
}

SortingChart sorter_verification_chart(int pump_oam, const SpectrumModel& spectrum, const SorterConfig& cfg,
                                       int truncation) {
  SortingChart chart = sorter_singles_chart(pump_oam, spectrum, cfg, truncation);
  double ref = sorter_singles_chart(0, spectrum, cfg, truncation).at(0, 0);
  if (!(ref > 0)) {
    ref = 0;
    for (const auto& row : chart.rows) ref = std::max(ref, *std::max_element(row.begin(), row.end()));
  }
  // Cells below round-off are reported as exact zeros.
  for (auto& row : chart.rows)
    for (auto& x : row) {
      if (ref > 0) x /= ref;
      if (x < 1e-15) x = 0;
    }
  return chart;
}

}  // namespace biphoton
