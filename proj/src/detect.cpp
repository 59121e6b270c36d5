#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "stx/detect.hpp"

namespace stx {

std::string_view to_string(Tail t) {
  switch (t) {
    case Tail::Negative: return "neg";
    case Tail::Positive: return "pos";
    case Tail::Both: return "both";
  }
  return "neg";
}

Tail parse_tail(std::string_view s) {
  if (s == "neg" || s == "negative") return Tail::Negative;
  if (s == "pos" || s == "positive") return Tail::Positive;
  if (s == "both") return Tail::Both;
  throw DomainError("unknown tail '" + std::string(s) + "' (expected neg, pos or both)");
}

double ThresholdSpec::lower_percentile() const {
  return split_tails ? percentile_total / 2.0 : percentile_total;
}

double ThresholdSpec::upper_percentile() const { return 100.0 - lower_percentile(); }

std::size_t ExtremeMask::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

ExtremeMask ExtremeMask::from_flags(std::size_t ntime, std::size_t nlat, std::size_t nlon,
                                    std::vector<std::uint8_t> flags, bool lon_global) {
  if (flags.size() != ntime * nlat * nlon) throw DomainError("mask flags do not match dimensions");
  ExtremeMask m;
  m.ntime = ntime;
  m.nlat = nlat;
  m.nlon = nlon;
  m.flags = std::move(flags);
  m.q_low = m.q_high = std::numeric_limits<double>::quiet_NaN();
  m.lon_global = lon_global;
  return m;
}

ExtremeMask threshold_mask(const Grid3D& anomalies, const ThresholdSpec& spec) {
  if (!(spec.percentile_total > 0.0 && spec.percentile_total < 100.0)) {
    throw DomainError("percentile_total must lie strictly between 0 and 100");
  }
  std::vector<double> pool;
  pool.reserve(anomalies.values.size());
  for (double v : anomalies.values) {
    if (!std::isnan(v)) pool.push_back(v);
  }
  if (pool.empty()) throw DomainError("threshold_mask: anomaly pool is empty");

  ExtremeMask m;
  m.ntime = anomalies.ntime();
  m.nlat = anomalies.nlat();
  m.nlon = anomalies.nlon();
  m.spec = spec;
  m.lon_global = anomalies.axes.is_lon_global();
  m.q_low = m.q_high = std::numeric_limits<double>::quiet_NaN();
  const bool neg = spec.tail != Tail::Positive;
  const bool pos = spec.tail != Tail::Negative;
  if (neg) m.q_low = percentile_inplace(pool, spec.lower_percentile());
  if (pos) m.q_high = percentile_inplace(pool, spec.upper_percentile());

  m.flags.assign(anomalies.values.size(), 0);
  for (std::size_t i = 0; i < m.flags.size(); ++i) {
    const double v = anomalies.values[i];
    if (std::isnan(v)) continue;
    if ((neg && v < m.q_low) || (pos && v > m.q_high)) m.flags[i] = 1;
  }
  return m;
}

bool is_structure_name(std::string_view name) {
  return std::find(kStructureNames.begin(), kStructureNames.end(), name) != kStructureNames.end();
}

NeighborhoodStructure neighborhood(std::string_view name, int lesd_connectivity) {
  if (!is_structure_name(name)) throw DomainError("unknown neighborhood structure '" + std::string(name) + "'");
  if (lesd_connectivity != 4 && lesd_connectivity != 8) {
    throw DomainError("lesd connectivity must be 4 or 8");
  }
  NeighborhoodStructure s;
  s.name = std::string(name);
  for (int dt = -1; dt <= 1; ++dt) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int l1 = std::abs(dt) + std::abs(dy) + std::abs(dx);
        if (l1 == 0) continue;
        bool keep = false;
        if (name == "seld") {
          keep = dy == 0 && dx == 0;
        } else if (name == "lesd") {
          keep = dt == 0 && (lesd_connectivity == 8 || l1 == 1);
        } else if (name == "6n") {
          keep = l1 == 1;
        } else if (name == "18n") {
          keep = l1 <= 2;
        } else if (name == "leld") {
          keep = true;
        }
        if (keep) s.offsets.push_back({dt, dy, dx});
      }
    }
  }
  return s;
}

std::size_t count_components(const Labeling& l) { return l.components.size(); }

std::vector<std::vector<std::size_t>> Labeling::component_voxels() const {
  std::vector<std::vector<std::size_t>> out(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) out[c].reserve(components[c].voxel_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) out[labels[i] - 1].push_back(i);
  }
  return out;
}

}  // namespace stx
