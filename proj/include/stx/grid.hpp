#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stx/errors.hpp"

namespace stx {

inline constexpr double kEarthRadius = 6371000.0;  // m
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kKgPerPg = 1.0e12;
inline constexpr double kKgPerTg = 1.0e9;

/// Calendar month encoded as year * 12 + (month - 1).
class MonthIndex {
public:
  constexpr MonthIndex() = default;
  constexpr explicit MonthIndex(std::int32_t raw) : raw_(raw) {}

  /// month in 1..12; throws DomainError otherwise.
  static MonthIndex from_year_month(int year, int month);
  /// Parses "YYYY-MM" (a trailing "-DD" is accepted and ignored).
  static MonthIndex parse(const std::string& text);

  constexpr std::int32_t raw() const { return raw_; }
  int year() const;
  int month() const;  // 1..12
  std::string to_string() const;  // "YYYY-MM"

  constexpr MonthIndex operator+(std::int32_t n) const { return MonthIndex(raw_ + n); }
  constexpr std::int32_t operator-(MonthIndex o) const { return raw_ - o.raw_; }
  constexpr auto operator<=>(const MonthIndex&) const = default;

private:
  std::int32_t raw_ = 0;
};

/// Seconds in the given calendar month (Gregorian, leap years honoured).
double month_seconds(MonthIndex m);
int days_in_month(MonthIndex m);

/// Area in m^2 of the spherical quadrilateral [lat_lo, lat_hi] x lon_width,
/// all in degrees.
double cell_area(double lat_lo, double lat_hi, double lon_width);

/// Horizontal axes of a regular or irregular lat-lon grid. Edges are
/// contiguous cell boundaries; centers lie strictly inside each cell.
struct LatLonAxes {
  std::vector<double> lat_edges;
  std::vector<double> lat_centers;
  std::vector<double> lon_edges;
  std::vector<double> lon_centers;

  std::size_t nlat() const { return lat_centers.size(); }
  std::size_t nlon() const { return lon_centers.size(); }
  std::size_t ncells() const { return nlat() * nlon(); }

  /// Uniform axes with centers at the cell midpoints.
  static LatLonAxes regular(double lat_lo, double lat_hi, std::size_t nlat,
                            double lon_lo, double lon_hi, std::size_t nlon);
  /// Axes whose centers are the midpoints of the given edges.
  static LatLonAxes from_edges(std::vector<double> lat_edges, std::vector<double> lon_edges);

  /// True when the longitude edges span a full circle (360 deg, +-1e-6).
  bool is_lon_global() const;
  double cell_area(std::size_t ilat, std::size_t ilon) const;
  /// Row-major (lat, lon) cell areas.
  std::vector<double> cell_areas() const;

  /// Throws ValidationError on a broken invariant.
  void validate() const;

  bool operator==(const LatLonAxes&) const = default;
};

enum class DType : std::uint8_t { Float32 = 0, Float64 = 1 };

/// A (time x lat x lon) volume. Missing voxels are NaN.
struct Grid3D {
  std::string variable_name;
  std::string units;
  std::vector<MonthIndex> time;
  LatLonAxes axes;
  std::vector<double> values;  // row-major (time, lat, lon)
  DType storage = DType::Float64;  // on-disk precision when written

  std::size_t ntime() const { return time.size(); }
  std::size_t nlat() const { return axes.nlat(); }
  std::size_t nlon() const { return axes.nlon(); }
  std::size_t ncells() const { return axes.ncells(); }
  std::size_t size() const { return ntime() * ncells(); }

  std::size_t index(std::size_t t, std::size_t y, std::size_t x) const {
    return (t * nlat() + y) * nlon() + x;
  }
  double at(std::size_t t, std::size_t y, std::size_t x) const { return values[index(t, y, x)]; }
  double& at(std::size_t t, std::size_t y, std::size_t x) { return values[index(t, y, x)]; }

  /// Time series of one (lat, lon) cell.
  std::vector<double> cell_series(std::size_t cell) const;
  void set_cell_series(std::size_t cell, std::span<const double> series);

  /// Grid with identical axes and metadata, values filled with `fill`.
  Grid3D like(double fill) const;
  bool same_shape(const Grid3D& other) const;

  /// Consecutive months starting at `first`.
  static std::vector<MonthIndex> month_range(MonthIndex first, std::size_t n);

  void validate() const;
};

bool is_missing(double v);

/// Linear-interpolation order statistic on (n - 1) ranks. NaNs are ignored.
/// Throws DomainError on an empty sample or p outside [0, 100].
double percentile(std::span<const double> values, double p);
double median(std::span<const double> values);
/// Same as percentile() but reorders `values` in place (NaNs must be absent).
double percentile_inplace(std::vector<double>& values, double p);

/// Sample (n - 1) standard deviation over non-missing entries; NaN when fewer
/// than two.
double sample_stddev(std::span<const double> values);

}  // namespace stx
