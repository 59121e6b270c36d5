#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "stx/attribution.hpp"

namespace stx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_shape(const Grid3D& g, std::size_t nt, std::size_t ny, std::size_t nx, const char* what) {
  if (g.ntime() != nt || g.nlat() != ny || g.nlon() != nx) {
    throw DomainError(std::string("attribution: ") + what + " grid does not match the labeling shape");
  }
}

}  // namespace

std::string to_string(ReferenceMode m) {
  return m == ReferenceMode::GlobalSnapshot ? "snapshot" : "footprint";
}

ReferenceMode parse_reference_mode(const std::string& s) {
  if (s == "footprint" || s == "footprint-climatology") return ReferenceMode::FootprintClimatology;
  if (s == "snapshot" || s == "global-snapshot") return ReferenceMode::GlobalSnapshot;
  throw DomainError("unknown reference mode '" + s + "' (expected footprint or snapshot)");
}

long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5)); }

LaggedMedian lagged_driver_median(const Grid3D& driver, std::span<const std::size_t> voxels, std::size_t lag) {
  const std::size_t nc = driver.ncells();
  std::vector<double> pool;
  pool.reserve(voxels.size());
  for (std::size_t v : voxels) {
    const std::size_t t = v / nc;
    if (t < lag) continue;
    const double d = driver.values[v - lag * nc];
    if (!std::isnan(d)) pool.push_back(d);
  }
  LaggedMedian out;
  out.covered = pool.size();
  out.coverage = voxels.empty() ? 0.0 : static_cast<double>(pool.size()) / static_cast<double>(voxels.size());
  out.median = pool.empty() ? kNaN : percentile_inplace(pool, 50.0);
  return out;
}

Quartiles reference_quartiles(const Grid3D& driver, std::span<const std::size_t> voxels, std::size_t lag,
                              const AttributionConfig& cfg) {
  const std::size_t nc = driver.ncells();
  std::vector<double> pool;
  if (cfg.reference == ReferenceMode::FootprintClimatology) {
    std::set<std::size_t> cells;
    for (std::size_t v : voxels) cells.insert(v % nc);
    for (std::size_t c : cells) {
      for (std::size_t t = 0; t < driver.ntime(); ++t) {
        const double d = driver.values[t * nc + c];
        if (!std::isnan(d)) pool.push_back(d);
      }
    }
  } else {
    std::set<std::size_t> months;
    for (std::size_t v : voxels) {
      if (v / nc >= lag) months.insert(v / nc - lag);
    }
    for (std::size_t t : months) {
      for (std::size_t c = 0; c < nc; ++c) {
        const double d = driver.values[t * nc + c];
        if (!std::isnan(d)) pool.push_back(d);
      }
    }
  }
  if (pool.empty()) return {kNaN, kNaN};
  Quartiles q;
  q.low = percentile_inplace(pool, cfg.q_low);
  q.high = percentile_inplace(pool, cfg.q_high);
  return q;
}

AttributionRecord classify_component(const Grid3D& tas, const Grid3D& pr, std::span<const std::size_t> voxels,
                                     const AttributionConfig& cfg) {
  require_shape(pr, tas.ntime(), tas.nlat(), tas.nlon(), "pr");
  AttributionRecord rec;
  for (std::size_t lag = 0; lag <= cfg.max_lag; ++lag) {
    LagRecord r;
    r.lag = lag;
    r.tas = lagged_driver_median(tas, voxels, lag);
    r.pr = lagged_driver_median(pr, voxels, lag);
    r.tas_ref = reference_quartiles(tas, voxels, lag, cfg);
    r.pr_ref = reference_quartiles(pr, voxels, lag, cfg);
    // NaN comparisons are false, so undefined medians or pools never flag.
    r.hot = r.tas.median > r.tas_ref.high;
    r.cold = r.tas.median < r.tas_ref.low;
    r.dry = r.pr.median < r.pr_ref.low;
    r.wet = r.pr.median > r.pr_ref.high;
    rec.lags.push_back(r);
  }
  return rec;
}

AttributionTable attribution_table(const Labeling& labeling, std::span<const ComponentStats> stats,
                                   const Grid3D& tas, const Grid3D& pr, const AttributionConfig& cfg) {
  require_shape(tas, labeling.ntime, labeling.nlat, labeling.nlon, "tas");
  require_shape(pr, labeling.ntime, labeling.nlat, labeling.nlon, "pr");
  if (cfg.top_k < 1) throw DomainError("attribution: top_k must be at least 1");

  AttributionTable table;
  table.structure = labeling.structure;
  table.top_k_requested = cfg.top_k;
  std::vector<const ComponentStats*> ranked;
  for (const auto& s : stats) ranked.push_back(&s);
  std::sort(ranked.begin(), ranked.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
  table.components_used = std::min(cfg.top_k, ranked.size());
  if (table.components_used < cfg.top_k) {
    table.note = "only " + std::to_string(ranked.size()) + " components available for top_k = " +
                 std::to_string(cfg.top_k);
  }

  const auto voxels = labeling.component_voxels();
  for (auto& cat : table.categories) cat.per_lag.assign(cfg.max_lag + 1, 0);
  for (std::size_t i = 0; i < table.components_used; ++i) {
    const auto* s = ranked[i];
    if (s->id == 0 || s->id > voxels.size()) throw DomainError("attribution: component id not in labeling");
    auto rec = classify_component(tas, pr, voxels[s->id - 1], cfg);
    rec.component = s->id;
    rec.rank = s->rank;
    for (const auto& r : rec.lags) {
      table.categories[static_cast<int>(Driver::Cold)].per_lag[r.lag] += r.cold;
      table.categories[static_cast<int>(Driver::Hot)].per_lag[r.lag] += r.hot;
      table.categories[static_cast<int>(Driver::Dry)].per_lag[r.lag] += r.dry;
      table.categories[static_cast<int>(Driver::Wet)].per_lag[r.lag] += r.wet;
    }
    table.records.push_back(std::move(rec));
  }
  for (auto& cat : table.categories) {
    double sum = 0.0;
    for (std::size_t c : cat.per_lag) sum += static_cast<double>(c);
    cat.mean = sum / static_cast<double>(cat.per_lag.size());
    cat.rounded = round_half_up(cat.mean);
  }
  return table;
}

}  // namespace stx
