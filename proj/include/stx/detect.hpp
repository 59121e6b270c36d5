#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stx/grid.hpp"

namespace stx {

enum class Tail { Negative, Positive, Both };

std::string_view to_string(Tail t);
Tail parse_tail(std::string_view s);  // "neg" | "negative" | "pos" | "positive" | "both"

/// How the extremes budget is turned into thresholds.
struct ThresholdSpec {
  double percentile_total = 10.0;  // percent of the pool flagged across both tails
  Tail tail = Tail::Negative;
  // true: the budget is shared by the two tails (5% + 5% for 10);
  // false: each requested tail takes the full percentile.
  bool split_tails = true;

  double lower_percentile() const;  // percent; negative tail threshold
  double upper_percentile() const;  // percent; positive tail threshold
};

struct ExtremeMask {
  std::size_t ntime = 0, nlat = 0, nlon = 0;
  std::vector<std::uint8_t> flags;  // 1 = extreme; missing voxels are 0
  ThresholdSpec spec;
  double q_low = 0.0;   // NaN when the negative tail is off
  double q_high = 0.0;  // NaN when the positive tail is off
  bool lon_global = false;

  std::size_t size() const { return flags.size(); }
  std::size_t count() const;
  std::size_t index(std::size_t t, std::size_t y, std::size_t x) const { return (t * nlat + y) * nlon + x; }

  /// Mask wrapping raw flags (no threshold provenance).
  static ExtremeMask from_flags(std::size_t ntime, std::size_t nlat, std::size_t nlon,
                                std::vector<std::uint8_t> flags, bool lon_global = false);
};

/// Flags anomaly < q_low (and/or > q_high), the thresholds being percentiles
/// of every non-missing anomaly. Throws DomainError on an empty pool.
ExtremeMask threshold_mask(const Grid3D& anomalies, const ThresholdSpec& spec = {});

struct Offset {
  int dt = 0, dlat = 0, dlon = 0;
  auto operator<=>(const Offset&) const = default;
};

/// Voxel adjacency: offsets from {-1,0,1}^3 minus the origin, closed under
/// negation.
struct NeighborhoodStructure {
  std::string name;
  std::vector<Offset> offsets;
};

/// The six canonical names, in increasing connectivity order.
inline constexpr std::array<std::string_view, 6> kStructureNames = {"sesd", "seld", "lesd", "6n", "18n", "leld"};

bool is_structure_name(std::string_view name);

/// sesd: none; seld: time only; lesd: spatial plane (8 or 4 connected);
/// 6n: faces; 18n: faces + edges; leld: all 26. Throws DomainError on an
/// unknown name or a lesd connectivity other than 4 or 8.
NeighborhoodStructure neighborhood(std::string_view name, int lesd_connectivity = 8);

struct ComponentInfo {
  std::uint32_t id = 0;  // 1-based
  std::size_t voxel_count = 0;
  // Ordering key: per-axis minima, then the first voxel in row-major order.
  std::size_t min_t = 0, min_lat = 0, min_lon = 0, first_voxel = 0;
};

struct Labeling {
  std::size_t ntime = 0, nlat = 0, nlon = 0;
  std::vector<std::uint32_t> labels;  // 0 = background, otherwise component id
  std::vector<ComponentInfo> components;  // components[i].id == i + 1
  std::string structure;

  std::size_t index(std::size_t t, std::size_t y, std::size_t x) const { return (t * nlat + y) * nlon + x; }

  /// Voxel indices per component, ascending, in id order.
  std::vector<std::vector<std::size_t>> component_voxels() const;
};

/// Connected components of the masked voxels under `s`. With wrap_lon the
/// last longitude column neighbours the first (requires a global mask).
/// Ids are ordered by ComponentInfo's key and independent of the worker
/// count. Throws DomainError when wrap_lon is set on a non-global mask.
Labeling label_components(const ExtremeMask& mask, const NeighborhoodStructure& s, bool wrap_lon);

std::size_t count_components(const Labeling& l);

}  // namespace stx
