#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stx/detect.hpp"
#include "stx/grid.hpp"

namespace stx {

struct ComponentStats {
  std::uint32_t id = 0;
  std::size_t voxel_count = 0;
  double carbon_integral = 0.0;   // Pg C, negative for losses
  double affected_area = 0.0;     // m^2, union of member cells
  double voxel_month_area = 0.0;  // m^2, summed over member voxels
  std::size_t duration = 0;       // months
  MonthIndex start;
  std::size_t t_min = 0, t_max = 0;
  std::size_t lat_min = 0, lat_max = 0;  // indices
  std::size_t lon_min = 0, lon_max = 0;
  std::size_t rank = 0;  // 1 = largest |carbon_integral|
};

/// Per-component integrals of anomaly * cell area * month length, ranked by
/// |carbon_integral| descending (ties: start, min lat, min lon, id).
/// Anomalies must be in kg m-2 s-1 on the labeling's shape.
std::vector<ComponentStats> component_metrics(const Labeling& l, const Grid3D& anomalies);

/// Integral of every masked, non-missing anomaly voxel in Pg C.
double masked_integral(const ExtremeMask& mask, const Grid3D& anomalies);

struct CumulativePoint {
  std::size_t k = 0;
  double share = 0.0;       // fraction of total |loss|
  double cumulative = 0.0;  // Pg C, signed
};

/// Share of total |carbon_integral| held by the top-k ranked components.
double cumulative_share(std::span<const ComponentStats> stats, std::size_t k);
/// One point per k = 1..N; the last share is exactly 1.
std::vector<CumulativePoint> cumulative_curve(std::span<const ComponentStats> stats);

struct Map2D {
  std::size_t nlat = 0, nlon = 0;
  std::vector<double> values;  // row-major (lat, lon); NaN = missing
  std::string units;

  double at(std::size_t y, std::size_t x) const { return values[y * nlon + x]; }
};

/// Per-cell integral of masked anomalies over time, in Tg C.
Map2D spatial_loss_map(const ExtremeMask& mask, const Grid3D& anomalies);
/// Per-cell sample standard deviation of anomalies (IAV); missing with fewer
/// than two valid steps.
Map2D iav_map(const Grid3D& anomalies);
/// column - row, cellwise.
Map2D map_difference(const Map2D& column, const Map2D& row);

struct TlsFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Orthogonal-distance line through (x, y): direction of the principal
/// eigenvector of the centred 2x2 covariance. Throws DomainError with fewer
/// than two points, no spread, or a vertical/undetermined direction.
TlsFit tls_fit(std::span<const double> x, std::span<const double> y);

}  // namespace stx
