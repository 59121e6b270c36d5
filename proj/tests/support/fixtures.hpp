#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stx/grid.hpp"

namespace stx::testing {

struct PlantedComponent {
  std::vector<std::size_t> voxels;  // ascending
  double mass_pg = 0.0;             // total planted loss, positive
};

struct PlantedScene {
  Grid3D gpp;  // anomalies, kg m-2 s-1; zero background
  std::optional<Grid3D> tas, pr;
  std::vector<PlantedComponent> components;
};

/// 8 months x 10 lat x 24 lon global grid (18 x 15 degree cells) with three
/// planted loss events, one straddling the +-180 seam and one connected only
/// through diagonal steps. Drivers carry a warm patch on the first event and
/// a dry patch on the second.
PlantedScene small_planted_scene();

/// 72 months x 36 lat x 72 lon (5 degree) global grid with `n` planted
/// events whose sizes are zeta(gamma) quantiles, each in its own box.
PlantedScene powerlaw_planted_scene(std::size_t n = 50, double gamma = 1.8);

/// Smallest s with zeta CDF(s) >= (i - 0.5) / n, for i = 1..n.
std::vector<std::size_t> zeta_quantile_sizes(std::size_t n, double gamma);

/// Exact discrete power-law draws p(k) ~ k^-gamma (Devroye's rejection method).
std::size_t sample_zeta(std::mt19937_64& rng, double gamma);

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

/// Concatenated bytes of every regular file below `dir`, keyed by relative path.
std::vector<std::pair<std::string, std::string>> snapshot_tree(const std::filesystem::path& dir);

/// Path of a file under tests/data.
std::filesystem::path data_file(const std::string& name);

}  // namespace stx::testing
