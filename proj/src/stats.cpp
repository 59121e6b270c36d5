#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_set>

#include "stx/io.hpp"
#include "stx/stats.hpp"

namespace stx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_flux_units(const Grid3D& g) {
  if (!g.units.empty() && g.units != units::kFluxSI) {
    throw DomainError("anomalies must be in '" + std::string(units::kFluxSI) + "', got '" + g.units + "'");
  }
}

// Seconds in each time step.
std::vector<double> month_seconds_of(const Grid3D& g) {
  std::vector<double> secs(g.ntime());
  for (std::size_t t = 0; t < g.ntime(); ++t) secs[t] = month_seconds(g.time[t]);
  return secs;
}

}  // namespace

std::vector<ComponentStats> component_metrics(const Labeling& l, const Grid3D& anomalies) {
  if (l.ntime != anomalies.ntime() || l.nlat != anomalies.nlat() || l.nlon != anomalies.nlon()) {
    throw DomainError("component_metrics: labeling and anomaly grid shapes differ");
  }
  require_flux_units(anomalies);
  const auto areas = anomalies.axes.cell_areas();
  const auto secs = month_seconds_of(anomalies);
  const std::size_t nc = anomalies.ncells();
  const auto voxels = l.component_voxels();

  std::vector<ComponentStats> out;
  out.reserve(voxels.size());
  for (std::size_t c = 0; c < voxels.size(); ++c) {
    ComponentStats s;
    s.id = l.components[c].id;
    s.voxel_count = voxels[c].size();
    s.t_min = s.lat_min = s.lon_min = std::numeric_limits<std::size_t>::max();
    std::unordered_set<std::size_t> cells;
    double kg = 0.0;
    for (std::size_t v : voxels[c]) {
      const std::size_t t = v / nc, cell = v % nc;
      const std::size_t y = cell / l.nlon, x = cell % l.nlon;
      const double a = anomalies.values[v];
      if (!std::isnan(a)) kg += a * areas[cell] * secs[t];
      s.voxel_month_area += areas[cell];
      if (cells.insert(cell).second) s.affected_area += areas[cell];
      s.t_min = std::min(s.t_min, t);
      s.t_max = std::max(s.t_max, t);
      s.lat_min = std::min(s.lat_min, y);
      s.lat_max = std::max(s.lat_max, y);
      s.lon_min = std::min(s.lon_min, x);
      s.lon_max = std::max(s.lon_max, x);
    }
    s.carbon_integral = kg / kKgPerPg;
    s.duration = s.t_max - s.t_min + 1;
    s.start = anomalies.time[s.t_min];
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const ComponentStats& a, const ComponentStats& b) {
    const double ma = std::abs(a.carbon_integral), mb = std::abs(b.carbon_integral);
    if (ma != mb) return ma > mb;
    return std::tie(a.start, a.lat_min, a.lon_min, a.id) < std::tie(b.start, b.lat_min, b.lon_min, b.id);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

double masked_integral(const ExtremeMask& mask, const Grid3D& anomalies) {
  if (mask.ntime != anomalies.ntime() || mask.nlat != anomalies.nlat() || mask.nlon != anomalies.nlon()) {
    throw DomainError("masked_integral: mask and anomaly grid shapes differ");
  }
  const auto areas = anomalies.axes.cell_areas();
  const auto secs = month_seconds_of(anomalies);
  const std::size_t nc = anomalies.ncells();
  double kg = 0.0;
  for (std::size_t v = 0; v < mask.flags.size(); ++v) {
    if (!mask.flags[v] || std::isnan(anomalies.values[v])) continue;
    kg += anomalies.values[v] * areas[v % nc] * secs[v / nc];
  }
  return kg / kKgPerPg;
}

namespace {

std::vector<const ComponentStats*> by_rank(std::span<const ComponentStats> stats) {
  std::vector<const ComponentStats*> ptrs;
  for (const auto& s : stats) ptrs.push_back(&s);
  std::sort(ptrs.begin(), ptrs.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
  return ptrs;
}

}  // namespace

std::vector<CumulativePoint> cumulative_curve(std::span<const ComponentStats> stats) {
  const auto ranked = by_rank(stats);
  double total = 0.0;
  for (auto* s : ranked) total += std::abs(s->carbon_integral);
  std::vector<CumulativePoint> out;
  double running = 0.0, signed_running = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    running += std::abs(ranked[i]->carbon_integral);
    signed_running += ranked[i]->carbon_integral;
    out.push_back({i + 1, total > 0.0 ? running / total : 1.0, signed_running});
  }
  return out;
}

double cumulative_share(std::span<const ComponentStats> stats, std::size_t k) {
  if (k < 1 || k > stats.size()) throw DomainError("cumulative_share: k must lie in 1..N");
  return cumulative_curve(stats)[k - 1].share;
}

Map2D spatial_loss_map(const ExtremeMask& mask, const Grid3D& anomalies) {
  if (mask.ntime != anomalies.ntime() || mask.nlat != anomalies.nlat() || mask.nlon != anomalies.nlon()) {
    throw DomainError("spatial_loss_map: mask and anomaly grid shapes differ");
  }
  require_flux_units(anomalies);
  const auto areas = anomalies.axes.cell_areas();
  const auto secs = month_seconds_of(anomalies);
  const std::size_t nc = anomalies.ncells();
  Map2D m{anomalies.nlat(), anomalies.nlon(), std::vector<double>(nc, 0.0), "Tg C"};
  for (std::size_t t = 0; t < anomalies.ntime(); ++t) {
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t v = t * nc + c;
      if (!mask.flags[v] || std::isnan(anomalies.values[v])) continue;
      m.values[c] += anomalies.values[v] * areas[c] * secs[t] / kKgPerTg;
    }
  }
  return m;
}

Map2D iav_map(const Grid3D& anomalies) {
  Map2D m{anomalies.nlat(), anomalies.nlon(), std::vector<double>(anomalies.ncells(), kNaN), anomalies.units};
  for (std::size_t c = 0; c < anomalies.ncells(); ++c) m.values[c] = sample_stddev(anomalies.cell_series(c));
  return m;
}

Map2D map_difference(const Map2D& column, const Map2D& row) {
  if (column.nlat != row.nlat || column.nlon != row.nlon) throw DomainError("map_difference: shapes differ");
  Map2D out = column;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = column.values[i] - row.values[i];
  return out;
}

TlsFit tls_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("tls_fit: x and y lengths differ");
  if (x.size() < 2) throw DomainError("tls_fit: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 && syy == 0.0) throw DomainError("tls_fit: zero variance in both coordinates");
  // Principal eigenvector (sxy, lambda - sxx) of [[sxx, sxy], [sxy, syy]].
  if (sxy == 0.0) {
    if (sxx > syy) return {0.0, my};
    throw DomainError("tls_fit: principal direction is vertical or undetermined");
  }
  const double lambda = 0.5 * (sxx + syy + std::hypot(sxx - syy, 2.0 * sxy));
  const double slope = (lambda - sxx) / sxy;
  return {slope, my - slope * mx};
}

}  // namespace stx
