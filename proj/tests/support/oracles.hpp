#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stx/attribution.hpp"
#include "stx/grid.hpp"

// Straightforward reference implementations used to cross-check the library.
namespace stx::testing {

/// Adjacency by structure name, decided from the offset itself.
bool oracle_adjacent(const std::string& structure, int dt, int dlat, int dlon);

/// Components found by breadth-first search: sorted voxel lists, sorted by
/// their first voxel.
std::vector<std::vector<std::size_t>> bfs_components(const std::vector<std::uint8_t>& flags, std::size_t nt,
                                                     std::size_t nlat, std::size_t nlon,
                                                     const std::string& structure, bool wrap);

/// Same canonical form built from a label vector.
std::vector<std::vector<std::size_t>> partition_of(const std::vector<std::uint32_t>& labels);

/// Order statistic by full sort with linear interpolation on (n - 1) ranks.
double sorted_percentile(std::vector<double> v, double p);

struct OracleFlags {
  bool hot = false, cold = false, dry = false, wet = false;
};

/// Hot/cold/dry/wet per lag from the defining comparisons: lagged driver
/// medians over the component against the 25th/75th percentiles of the
/// reference pool.
std::vector<OracleFlags> oracle_classify(const Grid3D& tas, const Grid3D& pr, const std::vector<std::size_t>& voxels,
                                         std::size_t max_lag, ReferenceMode mode);

}  // namespace stx::testing
