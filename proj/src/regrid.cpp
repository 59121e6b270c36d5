#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stx/io.hpp"

namespace stx {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Overlap {
  std::size_t src;
  double weight;
};

// For each destination latitude band, the source bands it intersects,
// weighted by the difference of sines across the intersection.
std::vector<std::vector<Overlap>> lat_overlaps(const std::vector<double>& src, const std::vector<double>& dst) {
  std::vector<std::vector<Overlap>> out(dst.size() - 1);
  for (std::size_t i = 0; i + 1 < dst.size(); ++i) {
    for (std::size_t j = 0; j + 1 < src.size(); ++j) {
      const double lo = std::max(dst[i], src[j]);
      const double hi = std::min(dst[i + 1], src[j + 1]);
      if (hi > lo) out[i].push_back({j, std::sin(hi * kDeg) - std::sin(lo * kDeg)});
    }
  }
  return out;
}

// Longitude intersections in radians, matching intervals modulo 360.
std::vector<std::vector<Overlap>> lon_overlaps(const std::vector<double>& src, const std::vector<double>& dst) {
  std::vector<std::vector<Overlap>> out(dst.size() - 1);
  for (std::size_t i = 0; i + 1 < dst.size(); ++i) {
    for (std::size_t j = 0; j + 1 < src.size(); ++j) {
      double total = 0.0;
      for (int k = -2; k <= 2; ++k) {
        const double shift = 360.0 * k;
        const double lo = std::max(dst[i], src[j] + shift);
        const double hi = std::min(dst[i + 1], src[j + 1] + shift);
        if (hi > lo) total += hi - lo;
      }
      if (total > 0.0) out[i].push_back({j, total * kDeg});
    }
  }
  return out;
}

}  // namespace

Grid3D regrid_conservative(const Grid3D& src, const LatLonAxes& dst) {
  src.validate();
  dst.validate();
  const auto lat_w = lat_overlaps(src.axes.lat_edges, dst.lat_edges);
  const auto lon_w = lon_overlaps(src.axes.lon_edges, dst.lon_edges);

  Grid3D out;
  out.variable_name = src.variable_name;
  out.units = src.units;
  out.time = src.time;
  out.axes = dst;
  out.storage = src.storage;
  out.values.assign(src.ntime() * dst.ncells(), std::numeric_limits<double>::quiet_NaN());

  const double r2 = kEarthRadius * kEarthRadius;
  const std::size_t snx = src.nlon();
  const std::size_t snc = src.ncells();
  for (std::size_t t = 0; t < src.ntime(); ++t) {
    const double* plane = src.values.data() + t * snc;
    for (std::size_t y = 0; y < dst.nlat(); ++y) {
      for (std::size_t x = 0; x < dst.nlon(); ++x) {
        double num = 0.0, den = 0.0;
        for (const auto& ly : lat_w[y]) {
          for (const auto& lx : lon_w[x]) {
            const double v = plane[ly.src * snx + lx.src];
            if (std::isnan(v)) continue;
            const double w = r2 * ly.weight * lx.weight;
            num += w * v;
            den += w;
          }
        }
        if (den > 0.0) out.values[(t * dst.nlat() + y) * dst.nlon() + x] = num / den;
      }
    }
  }
  return out;
}

double area_integral(const Grid3D& g) {
  const auto areas = g.axes.cell_areas();
  const std::size_t nc = g.ncells();
  double sum = 0.0;
  for (std::size_t t = 0; t < g.ntime(); ++t) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double v = g.values[t * nc + c];
      if (!std::isnan(v)) sum += areas[c] * v;
    }
  }
  return sum;
}

}  // namespace stx
