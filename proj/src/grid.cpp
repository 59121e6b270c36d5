#include "stx/grid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "stx/parallel.hpp"

namespace stx {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::int32_t floor_div(std::int32_t a, std::int32_t b) {
  std::int32_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

MonthIndex MonthIndex::from_year_month(int year, int month) {
  if (month < 1 || month > 12) {
    throw DomainError("month must be in 1..12, got " + std::to_string(month));
  }
  return MonthIndex(year * 12 + (month - 1));
}

MonthIndex MonthIndex::parse(const std::string& text) {
  int y = 0, m = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%d%c", &y, &m, &tail) < 2) {
    throw DomainError("expected YYYY-MM, got '" + text + "'");
  }
  if (tail != 0 && tail != '-') throw DomainError("expected YYYY-MM, got '" + text + "'");
  return from_year_month(y, m);
}

int MonthIndex::year() const { return floor_div(raw_, 12); }
int MonthIndex::month() const { return raw_ - floor_div(raw_, 12) * 12 + 1; }

std::string MonthIndex::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
  return buf;
}

int days_in_month(MonthIndex m) {
  using namespace std::chrono;
  const year_month_day_last last{year{m.year()} / month{static_cast<unsigned>(m.month())} / std::chrono::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

double month_seconds(MonthIndex m) { return kSecondsPerDay * days_in_month(m); }

double cell_area(double lat_lo, double lat_hi, double lon_width) {
  if (!(lat_lo >= -90.0 && lat_hi <= 90.0 && lat_lo < lat_hi)) {
    throw DomainError("cell_area: latitude bounds must satisfy -90 <= lo < hi <= 90");
  }
  if (!(lon_width > 0.0)) throw DomainError("cell_area: longitude width must be positive");
  return kEarthRadius * kEarthRadius * (lon_width * kDeg) *
         (std::sin(lat_hi * kDeg) - std::sin(lat_lo * kDeg));
}

// ---------------------------------------------------------------------------
// LatLonAxes

LatLonAxes LatLonAxes::regular(double lat_lo, double lat_hi, std::size_t nlat, double lon_lo,
                               double lon_hi, std::size_t nlon) {
  if (nlat == 0 || nlon == 0) throw DomainError("regular axes need at least one cell per axis");
  std::vector<double> lat_edges(nlat + 1), lon_edges(nlon + 1);
  for (std::size_t i = 0; i <= nlat; ++i) {
    lat_edges[i] = lat_lo + (lat_hi - lat_lo) * static_cast<double>(i) / static_cast<double>(nlat);
  }
  for (std::size_t i = 0; i <= nlon; ++i) {
    lon_edges[i] = lon_lo + (lon_hi - lon_lo) * static_cast<double>(i) / static_cast<double>(nlon);
  }
  return from_edges(std::move(lat_edges), std::move(lon_edges));
}

LatLonAxes LatLonAxes::from_edges(std::vector<double> lat_edges, std::vector<double> lon_edges) {
  LatLonAxes a;
  a.lat_edges = std::move(lat_edges);
  a.lon_edges = std::move(lon_edges);
  for (std::size_t i = 0; i + 1 < a.lat_edges.size(); ++i) {
    a.lat_centers.push_back(0.5 * (a.lat_edges[i] + a.lat_edges[i + 1]));
  }
  for (std::size_t i = 0; i + 1 < a.lon_edges.size(); ++i) {
    a.lon_centers.push_back(0.5 * (a.lon_edges[i] + a.lon_edges[i + 1]));
  }
  return a;
}

bool LatLonAxes::is_lon_global() const {
  if (lon_edges.size() < 2) return false;
  return std::abs((lon_edges.back() - lon_edges.front()) - 360.0) <= 1e-6;
}

double LatLonAxes::cell_area(std::size_t ilat, std::size_t ilon) const {
  return stx::cell_area(lat_edges[ilat], lat_edges[ilat + 1], lon_edges[ilon + 1] - lon_edges[ilon]);
}

std::vector<double> LatLonAxes::cell_areas() const {
  std::vector<double> out(ncells());
  for (std::size_t y = 0; y < nlat(); ++y) {
    for (std::size_t x = 0; x < nlon(); ++x) out[y * nlon() + x] = cell_area(y, x);
  }
  return out;
}

namespace {

void validate_axis(const std::vector<double>& edges, const std::vector<double>& centers,
                   const char* name) {
  if (centers.empty()) throw ValidationError(std::string(name) + " axis is empty");
  if (edges.size() != centers.size() + 1) {
    throw ValidationError(std::string(name) + " edges must number centers + 1");
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) {
      throw ValidationError(std::string(name) + " edges are not strictly increasing");
    }
    if (!(edges[i] < centers[i] && centers[i] < edges[i + 1])) {
      throw ValidationError(std::string(name) + " center " + std::to_string(i) +
                            " is not strictly inside its cell");
    }
  }
}

}  // namespace

void LatLonAxes::validate() const {
  validate_axis(lat_edges, lat_centers, "latitude");
  validate_axis(lon_edges, lon_centers, "longitude");
  if (lat_edges.front() < -90.0 || lat_edges.back() > 90.0) {
    throw ValidationError("latitude edges must lie within [-90, 90]");
  }
  if (lon_edges.back() - lon_edges.front() > 360.0 + 1e-6) {
    throw ValidationError("longitude span exceeds 360 degrees");
  }
}

// ---------------------------------------------------------------------------
// Grid3D

std::vector<double> Grid3D::cell_series(std::size_t cell) const {
  std::vector<double> s(ntime());
  const std::size_t nc = ncells();
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = values[t * nc + cell];
  return s;
}

void Grid3D::set_cell_series(std::size_t cell, std::span<const double> series) {
  const std::size_t nc = ncells();
  for (std::size_t t = 0; t < series.size(); ++t) values[t * nc + cell] = series[t];
}

Grid3D Grid3D::like(double fill) const {
  Grid3D g;
  g.variable_name = variable_name;
  g.units = units;
  g.time = time;
  g.axes = axes;
  g.storage = storage;
  g.values.assign(size(), fill);
  return g;
}

bool Grid3D::same_shape(const Grid3D& other) const {
  return ntime() == other.ntime() && nlat() == other.nlat() && nlon() == other.nlon();
}

std::vector<MonthIndex> Grid3D::month_range(MonthIndex first, std::size_t n) {
  std::vector<MonthIndex> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = first + static_cast<std::int32_t>(i);
  return out;
}

void Grid3D::validate() const {
  axes.validate();
  if (time.empty()) throw ValidationError("time axis is empty");
  for (std::size_t i = 1; i < time.size(); ++i) {
    if (time[i] - time[i - 1] != 1) {
      throw ValidationError("time axis must be consecutive months (gap after " +
                            time[i - 1].to_string() + ")");
    }
  }
  if (values.size() != size()) {
    throw ValidationError("value count does not match ntime * nlat * nlon");
  }
}

// ---------------------------------------------------------------------------
// Order statistics

bool is_missing(double v) { return std::isnan(v); }

double percentile_inplace(std::vector<double>& values, double p) {
  if (values.empty()) throw DomainError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile p must lie in [0, 100]");
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(std::floor(rank)), values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  const auto lo_it = values.begin() + static_cast<std::ptrdiff_t>(lo);
  std::nth_element(values.begin(), lo_it, values.end());
  const double lo_v = *lo_it;
  if (frac == 0.0 || lo + 1 >= values.size()) return lo_v;
  const double hi_v = *std::min_element(lo_it + 1, values.end());
  return lo_v + frac * (hi_v - lo_v);
}

double percentile(std::span<const double> values, double p) {
  std::vector<double> pool;
  pool.reserve(values.size());
  for (double v : values) {
    if (!is_missing(v)) pool.push_back(v);
  }
  return percentile_inplace(pool, p);
}

double median(std::span<const double> values) { return percentile(values, 50.0); }

double sample_stddev(std::span<const double> values) {
  double mean = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (!is_missing(v)) {
      mean += v;
      ++n;
    }
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    if (!is_missing(v)) ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Parallel helpers

std::size_t worker_count() {
  if (const char* env = std::getenv("STX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, &errors, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace stx
