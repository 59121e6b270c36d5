#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stx/attribution.hpp"
#include "stx/detect.hpp"
#include "stx/grid.hpp"
#include "stx/powerlaw.hpp"

namespace stx {

enum class WrapMode { Auto, On, Off };

/// Regular lat-lon target for regridding every input.
struct TargetGrid {
  double lat_lo = -90.0, lat_hi = 90.0;
  std::size_t nlat = 0;
  double lon_lo = 0.0, lon_hi = 360.0;
  std::size_t nlon = 0;

  LatLonAxes axes() const { return LatLonAxes::regular(lat_lo, lat_hi, nlat, lon_lo, lon_hi, nlon); }
};

struct PipelineConfig {
  std::filesystem::path gpp, tas, pr;  // tas/pr empty: attribution skipped
  std::optional<MonthIndex> start, end;
  std::optional<TargetGrid> target_grid;
  bool preprocess = true;  // false: inputs are already anomalies / scaled drivers
  std::size_t ssa_window = 0;
  ThresholdSpec threshold;
  std::vector<std::string> structures{kStructureNames.begin(), kStructureNames.end()};
  int lesd_connectivity = 8;
  WrapMode wrap_lon = WrapMode::Auto;
  AttributionConfig attribution;
  FitMethod fit_method = FitMethod::LogBinnedLeastSquares;
  bool fit_sesd = false;
  std::filesystem::path out = "stx_out";
  std::set<std::string> formats{"csv", "json", "svg"};

  /// Throws ConfigError for unknown structures, formats or bad values.
  void validate() const;
  /// Canonical key=value listing (sorted keys, output directory excluded).
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text(), hex encoded.
  std::string hash() const;
};

/// Flat key=value text; '#' starts a comment. Relative input paths resolve
/// against `base_dir`. Throws ConfigError on unknown keys or bad values.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies one key=value setting. Throws ConfigError.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

std::string fnv1a_hex(std::string_view bytes);

}  // namespace stx
