#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stx/detect.hpp"
#include "stx/grid.hpp"
#include "stx/stats.hpp"

namespace stx {

/// Population behind the 25th/75th percentile reference values.
enum class ReferenceMode {
  FootprintClimatology,  // the component's cells over the full record
  GlobalSnapshot,        // every valid cell at the lag-shifted event months
};

std::string to_string(ReferenceMode m);
ReferenceMode parse_reference_mode(const std::string& s);  // "footprint" | "snapshot"

struct AttributionConfig {
  std::size_t top_k = 100;
  std::size_t max_lag = 3;  // months
  double q_low = 25.0;
  double q_high = 75.0;
  ReferenceMode reference = ReferenceMode::FootprintClimatology;
};

struct LaggedMedian {
  double median = 0.0;  // NaN when no voxel is covered
  double coverage = 0.0;  // covered / member voxels
  std::size_t covered = 0;
};

/// Median of driver(t - lag, y, x) over the component's voxels, skipping
/// voxels shifted before the record start or onto missing values.
LaggedMedian lagged_driver_median(const Grid3D& driver, std::span<const std::size_t> voxels, std::size_t lag);

struct Quartiles {
  double low = 0.0;   // NaN when the reference pool is empty
  double high = 0.0;
};

Quartiles reference_quartiles(const Grid3D& driver, std::span<const std::size_t> voxels, std::size_t lag,
                              const AttributionConfig& cfg);

struct LagRecord {
  std::size_t lag = 0;
  LaggedMedian tas, pr;
  Quartiles tas_ref, pr_ref;
  bool hot = false, cold = false, dry = false, wet = false;
};

struct AttributionRecord {
  std::uint32_t component = 0;
  std::size_t rank = 0;
  std::vector<LagRecord> lags;  // 0..max_lag
};

/// Strict-inequality flags per lag: hot tas > q75, cold tas < q25,
/// dry pr < q25, wet pr > q75. Undefined medians leave flags false.
AttributionRecord classify_component(const Grid3D& tas, const Grid3D& pr, std::span<const std::size_t> voxels,
                                     const AttributionConfig& cfg);

enum class Driver { Cold = 0, Hot = 1, Dry = 2, Wet = 3 };
inline constexpr std::array<const char*, 4> kDriverNames = {"cold", "hot", "dry", "wet"};

struct CategoryCount {
  std::vector<std::size_t> per_lag;
  double mean = 0.0;       // averaged over lags
  long long rounded = 0;   // round half up
};

struct AttributionTable {
  std::string structure;
  std::size_t top_k_requested = 0;
  std::size_t components_used = 0;
  std::string note;  // set when fewer components than top_k exist
  std::array<CategoryCount, 4> categories;  // indexed by Driver
  std::vector<AttributionRecord> records;   // rank order
};

/// Classifies the top-k ranked components and averages category counts over
/// lags 0..max_lag. Drivers must share the labeling's shape.
AttributionTable attribution_table(const Labeling& labeling, std::span<const ComponentStats> stats,
                                   const Grid3D& tas, const Grid3D& pr, const AttributionConfig& cfg);

/// Nearest integer, halves rounded up.
long long round_half_up(double x);

}  // namespace stx
