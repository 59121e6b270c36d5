#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stx/grid.hpp"

namespace stx {

// STXG container, all integers little-endian:
//   "STXG" | u32 version (=1) | u32 ntime | u32 nlat | u32 nlon | u8 dtype
//   | u16 len + units | u16 len + variable name | i32[ntime] month index
//   | f64[nlat+1] lat edges | f64[nlat] lat centers
//   | f64[nlon+1] lon edges | f64[nlon] lon centers
//   | data[ntime*nlat*nlon] as f32 (dtype 0) or f64 (dtype 1); NaN = missing
inline constexpr std::uint32_t kStxgVersion = 1;

/// Throws FormatError (magic/version/dtype), CorruptionError (payload length)
/// or ValidationError (axis invariants).
Grid3D read_grid(std::span<const std::uint8_t> bytes);
/// Canonical byte stream. NaNs are written as the canonical quiet NaN.
std::vector<std::uint8_t> write_grid(const Grid3D& g);

Grid3D read_grid_file(const std::filesystem::path& path);
void write_grid_file(const Grid3D& g, const std::filesystem::path& path);

/// Text fixture format:
///   # var=NAME
///   # units=UNITS
///   # lat_edges=e0,e1,...
///   # lon_edges=e0,e1,...
///   # t0=YYYY-MM
/// then one line per (time, lat) holding nlon comma-separated values; NA is
/// missing. Centers are the edge midpoints.
Grid3D read_csv_grid(std::string_view text);
std::string write_csv_grid(const Grid3D& g);

/// Reads .csv files as CSV fixtures, anything else as STXG.
Grid3D load_grid(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Units

/// Recognized unit strings.
namespace units {
inline constexpr std::string_view kFluxSI = "kg m-2 s-1";
inline constexpr std::string_view kFluxDaily = "gC m-2 day-1";
inline constexpr std::string_view kKelvin = "K";
inline constexpr std::string_view kCelsius = "degC";
inline constexpr std::string_view kPrecipMonthly = "mm month-1";
inline constexpr std::string_view kPrecipSI = "kg m-2 s-1 (pr)";
}  // namespace units

bool is_known_unit(std::string_view u);
bool units_compatible(std::string_view from, std::string_view to);

/// Rescales values to `target`. Precipitation depths per month use each
/// step's calendar length. Throws DomainError for unknown or incompatible
/// units.
Grid3D convert_units(const Grid3D& g, std::string_view target);

// ---------------------------------------------------------------------------
// Time handling

/// Inclusive month window [start, end].
Grid3D subset_time(const Grid3D& g, MonthIndex start, MonthIndex end);

struct CivilDate {
  int year = 0;
  int month = 1;
  int day = 1;
};

/// A value representative of `span_days` consecutive days starting at `start`
/// (e.g. an 8-day composite).
struct DatedSample {
  CivilDate start;
  int span_days = 1;
  double value = 0.0;
};

struct SubMonthlySeries {
  LatLonAxes axes;
  std::string variable_name;
  std::string units;
  std::vector<std::vector<DatedSample>> cells;  // row-major (lat, lon)
};

/// Day-weighted monthly means over [first, last]. Months with no coverage
/// are missing; missing sample values contribute no coverage.
Grid3D aggregate_monthly(const SubMonthlySeries& series, MonthIndex first, MonthIndex last);
/// Month window spanning every sample.
Grid3D aggregate_monthly(const SubMonthlySeries& series);

// ---------------------------------------------------------------------------
// Regridding

/// First-order conservative remap between regular lat-lon grids. Longitudes
/// are matched modulo 360. Destination cells with no non-missing overlap are
/// missing.
Grid3D regrid_conservative(const Grid3D& src, const LatLonAxes& dst);

/// Sum of area * value over non-missing voxels (m^2 times value units).
double area_integral(const Grid3D& g);

}  // namespace stx
