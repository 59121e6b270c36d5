#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stx/grid.hpp"

namespace stx {

enum class SsaGroup { Trend, Annual, Anomaly };

struct SsaOptions {
  std::size_t window = 0;             // 0 selects default_ssa_window(T)
  double trend_cutoff = 1.0 / 120.0;  // cycles/month; slower goes to the trend
  double annual_period = 12.0;        // months
  int annual_harmonics = 6;
};

struct Eigentriple {
  double eigenvalue = 0.0;
  double eigenvector_frequency = 0.0;  // periodogram argmax of the eigenvector, cycles/month
  double component_frequency = 0.0;    // periodogram argmax of the reconstruction, cycles/month
  SsaGroup group = SsaGroup::Anomaly;
};

struct SsaDecomposition {
  std::vector<double> trend;
  std::vector<double> annual;
  std::vector<double> anomaly;
  std::size_t window_length = 0;
  std::vector<Eigentriple> spectrum;  // descending eigenvalue
};

/// Largest multiple of 12 not exceeding T / 2.
std::size_t default_ssa_window(std::size_t series_length);

/// Singular spectrum analysis of a gap-free monthly series, embedded after
/// removing its mean (which is returned as part of the trend). Each eigentriple
/// is reconstructed by diagonal averaging and grouped by the dominant
/// frequency of its reconstruction: below the trend cutoff, or at most one
/// cycle per record -> trend; within half a frequency bin of k/12 (k = 1..6) -> annual, otherwise anomaly.
/// `anomaly` is the exact residual so the three groups sum to the input.
SsaDecomposition ssa_decompose(std::span<const double> series, const SsaOptions& opts = {});

/// Grid result plus the cells whose normalisation was degenerate.
struct ScaledGrid {
  Grid3D grid;
  std::vector<std::size_t> flagged_cells;  // row-major (lat, lon) indices
};

/// value - trend - annual per cell; cells with any missing month stay missing.
Grid3D compute_anomalies(const Grid3D& g, const SsaOptions& opts = {});

/// (value - trend - annual) / sigma, sigma the per-cell sample standard
/// deviation of that residual. Zero-sigma cells become 0 and are flagged.
ScaledGrid scale_temperature(const Grid3D& g, const SsaOptions& opts = {});

/// (value - trend) / sum(value) per cell; the annual cycle is kept. Cells
/// with zero total become 0 and are flagged.
ScaledGrid normalize_precip(const Grid3D& g, const SsaOptions& opts = {});

}  // namespace stx
