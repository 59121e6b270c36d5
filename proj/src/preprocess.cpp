#include <algorithm>
#include <cmath>
#include <limits>

#include "stx/parallel.hpp"
#include "stx/preprocess.hpp"

namespace stx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_missing(const std::vector<double>& s) {
  return std::any_of(s.begin(), s.end(), [](double v) { return std::isnan(v); });
}

// Applies `per_cell(series, out, flagged)` to every gap-free cell; gappy
// cells come out all-missing. Each cell only touches its own output slots.
template <typename Fn>
ScaledGrid map_cells(const Grid3D& g, Fn per_cell) {
  g.validate();
  ScaledGrid res{g.like(kNaN), {}};
  std::vector<std::uint8_t> flags(g.ncells(), 0);
  parallel_for(g.ncells(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> out(g.ntime());
    for (std::size_t c = begin; c < end; ++c) {
      const auto series = g.cell_series(c);
      if (has_missing(series)) continue;
      bool flagged = false;
      per_cell(series, out, flagged);
      flags[c] = flagged ? 1 : 0;
      res.grid.set_cell_series(c, out);
    }
  });
  for (std::size_t c = 0; c < flags.size(); ++c) {
    if (flags[c]) res.flagged_cells.push_back(c);
  }
  return res;
}

double max_abs(const std::vector<double>& s) {
  double m = 0.0;
  for (double v : s) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

Grid3D compute_anomalies(const Grid3D& g, const SsaOptions& opts) {
  auto res = map_cells(g, [&](const std::vector<double>& x, std::vector<double>& out, bool&) {
    out = ssa_decompose(x, opts).anomaly;
  });
  res.grid.variable_name = g.variable_name + "_anomaly";
  return std::move(res.grid);
}

ScaledGrid scale_temperature(const Grid3D& g, const SsaOptions& opts) {
  auto res = map_cells(g, [&](const std::vector<double>& x, std::vector<double>& out, bool& flagged) {
    const auto dec = ssa_decompose(x, opts);
    const double sigma = sample_stddev(dec.anomaly);
    // Residual noise of an exactly separable series is not a real anomaly.
    if (!(sigma > 1e-10 * std::max(max_abs(x), std::numeric_limits<double>::min()))) {
      std::fill(out.begin(), out.end(), 0.0);
      flagged = true;
      return;
    }
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = dec.anomaly[t] / sigma;
  });
  res.grid.variable_name = g.variable_name + "_scaled";
  res.grid.units = "1";
  return res;
}

ScaledGrid normalize_precip(const Grid3D& g, const SsaOptions& opts) {
  auto res = map_cells(g, [&](const std::vector<double>& x, std::vector<double>& out, bool& flagged) {
    double total = 0.0;
    for (double v : x) total += v;
    if (total == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      flagged = true;
      return;
    }
    const auto dec = ssa_decompose(x, opts);
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = (x[t] - dec.trend[t]) / total;
  });
  res.grid.variable_name = g.variable_name + "_normalized";
  res.grid.units = "1";
  return res;
}

}  // namespace stx
