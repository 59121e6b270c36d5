#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

#include "stx/detect.hpp"
#include "stx/parallel.hpp"

namespace stx {

namespace {

// Union-find whose root is always the smallest voxel index of its set, so
// the forest's final roots do not depend on the order of unions.
class MinRootForest {
public:
  explicit MinRootForest(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::uint32_t find(std::uint32_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

private:
  std::vector<std::uint32_t> parent_;
};

struct Volume {
  std::size_t nt, ny, nx;
  bool wrap;

  // Neighbour of (t, y, x) along o, or npos when it falls off the volume.
  std::size_t neighbour(std::size_t t, std::size_t y, std::size_t x, const Offset& o) const {
    const auto tt = static_cast<std::ptrdiff_t>(t) + o.dt;
    const auto yy = static_cast<std::ptrdiff_t>(y) + o.dlat;
    auto xx = static_cast<std::ptrdiff_t>(x) + o.dlon;
    if (tt < 0 || tt >= static_cast<std::ptrdiff_t>(nt)) return npos;
    if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(ny)) return npos;
    if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(nx)) {
      if (!wrap) return npos;
      xx = (xx + static_cast<std::ptrdiff_t>(nx)) % static_cast<std::ptrdiff_t>(nx);
    }
    return (static_cast<std::size_t>(tt) * ny + static_cast<std::size_t>(yy)) * nx + static_cast<std::size_t>(xx);
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

}  // namespace

Labeling label_components(const ExtremeMask& mask, const NeighborhoodStructure& s, bool wrap_lon) {
  if (mask.flags.size() != mask.ntime * mask.nlat * mask.nlon) {
    throw DomainError("label_components: mask flags do not match dimensions");
  }
  if (wrap_lon && !mask.lon_global) {
    throw DomainError("label_components: longitude wrap requested on a non-global grid");
  }
  if (mask.flags.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("label_components: volume exceeds 2^32 voxels");
  }

  // Each undirected adjacency is visited once, from its lexicographically
  // smaller end.
  std::vector<Offset> forward;
  for (const auto& o : s.offsets) {
    if (o > Offset{}) forward.push_back(o);
  }

  const Volume vol{mask.ntime, mask.nlat, mask.nlon, wrap_lon};
  const std::size_t plane = mask.nlat * mask.nlon;
  MinRootForest forest(mask.flags.size());

  auto link_voxel = [&](std::size_t t, std::size_t y, std::size_t x, std::size_t t_limit) {
    const std::size_t v = (t * vol.ny + y) * vol.nx + x;
    if (!mask.flags[v]) return;
    for (const auto& o : forward) {
      const std::size_t u = vol.neighbour(t, y, x, o);
      if (u == Volume::npos || u / plane >= t_limit || !mask.flags[u]) continue;
      forest.unite(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u));
    }
  };

  // Time slabs are labelled concurrently; a slab only links voxels inside
  // itself, so the workers touch disjoint parts of the forest.
  const std::size_t slabs = std::max<std::size_t>(1, std::min(worker_count(), mask.ntime));
  const std::size_t slab_len = mask.ntime == 0 ? 0 : (mask.ntime + slabs - 1) / slabs;
  parallel_for(slabs, [&](std::size_t b, std::size_t e) {
    for (std::size_t sidx = b; sidx < e; ++sidx) {
      const std::size_t t0 = sidx * slab_len;
      const std::size_t t1 = std::min(mask.ntime, t0 + slab_len);
      for (std::size_t t = t0; t < t1; ++t) {
        for (std::size_t y = 0; y < vol.ny; ++y) {
          for (std::size_t x = 0; x < vol.nx; ++x) link_voxel(t, y, x, t1);
        }
      }
    }
  });
  // Sequential merge across slab boundaries.
  for (std::size_t sidx = 1; sidx < slabs; ++sidx) {
    const std::size_t t = sidx * slab_len;
    if (t == 0 || t >= mask.ntime) continue;
    for (std::size_t y = 0; y < vol.ny; ++y) {
      for (std::size_t x = 0; x < vol.nx; ++x) link_voxel(t - 1, y, x, mask.ntime);
    }
  }

  Labeling out;
  out.ntime = mask.ntime;
  out.nlat = mask.nlat;
  out.nlon = mask.nlon;
  out.structure = s.name;
  out.labels.assign(mask.flags.size(), 0);

  // Roots are the first voxel of each component in row-major order.
  std::vector<std::uint32_t> root_slot(mask.flags.size(), 0);
  std::vector<ComponentInfo> comps;
  for (std::size_t v = 0; v < mask.flags.size(); ++v) {
    if (!mask.flags[v]) continue;
    const std::uint32_t r = forest.find(static_cast<std::uint32_t>(v));
    const std::size_t t = v / plane, y = (v % plane) / vol.nx, x = v % vol.nx;
    if (r == v) {
      root_slot[r] = static_cast<std::uint32_t>(comps.size());
      comps.push_back({0, 0, t, y, x, v});
    }
    auto& c = comps[root_slot[r]];
    ++c.voxel_count;
    c.min_lat = std::min(c.min_lat, y);
    c.min_lon = std::min(c.min_lon, x);
  }
  std::vector<std::uint32_t> order(comps.size());
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& ca = comps[a];
    const auto& cb = comps[b];
    return std::tie(ca.min_t, ca.min_lat, ca.min_lon, ca.first_voxel) <
           std::tie(cb.min_t, cb.min_lat, cb.min_lon, cb.first_voxel);
  });
  std::vector<std::uint32_t> id_of(comps.size());
  out.components.reserve(comps.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    id_of[order[i]] = static_cast<std::uint32_t>(i + 1);
    out.components.push_back(comps[order[i]]);
    out.components.back().id = static_cast<std::uint32_t>(i + 1);
  }
  for (std::size_t v = 0; v < mask.flags.size(); ++v) {
    if (mask.flags[v]) out.labels[v] = id_of[root_slot[forest.find(static_cast<std::uint32_t>(v))]];
  }
  return out;
}

}  // namespace stx
