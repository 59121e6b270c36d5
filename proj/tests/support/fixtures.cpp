#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace stx::testing {

namespace fs = std::filesystem;

namespace {

constexpr double kR = 6371000.0;

// Area of a cell from its edges, in m^2.
double band_area(double lat0, double lat1, double dlon_deg) {
  const double d2r = std::numbers::pi / 180.0;
  return kR * kR * dlon_deg * d2r * (std::sin(lat1 * d2r) - std::sin(lat0 * d2r));
}

Grid3D empty_grid(std::size_t nt, std::size_t nlat, std::size_t nlon, double lon0) {
  Grid3D g;
  g.variable_name = "gpp_anomaly";
  g.units = "kg m-2 s-1";
  g.time = Grid3D::month_range(MonthIndex::from_year_month(2001, 1), nt);
  g.axes = LatLonAxes::regular(-90.0, 90.0, nlat, lon0, lon0 + 360.0, nlon);
  g.values.assign(nt * nlat * nlon, 0.0);
  return g;
}

// Writes -mass_pg spread over `voxels` (mass per voxel from `share`).
void plant(Grid3D& g, PlantedComponent& c, const std::vector<double>& voxel_mass_pg) {
  const std::size_t nc = g.ncells();
  const double dlon = 360.0 / static_cast<double>(g.nlon());
  for (std::size_t k = 0; k < c.voxels.size(); ++k) {
    const std::size_t v = c.voxels[k];
    const std::size_t t = v / nc, y = (v % nc) / g.nlon();
    const double area = band_area(g.axes.lat_edges[y], g.axes.lat_edges[y + 1], dlon);
    const double secs = 86400.0 * days_in_month(g.time[t]);
    g.values[v] = -voxel_mass_pg[k] * 1e12 / (area * secs);
    c.mass_pg += voxel_mass_pg[k];
  }
}

double zeta(double gamma) {
  const std::size_t K = 200000;
  double s = 0.0;
  for (std::size_t k = K; k >= 1; --k) s += std::pow(static_cast<double>(k), -gamma);
  // Euler-Maclaurin tail beyond K.
  const double kk = static_cast<double>(K);
  s += std::pow(kk, 1.0 - gamma) / (gamma - 1.0) - 0.5 * std::pow(kk, -gamma);
  return s;
}

}  // namespace

PlantedScene small_planted_scene() {
  PlantedScene s;
  s.gpp = empty_grid(8, 10, 24, -180.0);
  const auto& g = s.gpp;
  const auto idx = [&](std::size_t t, std::size_t y, std::size_t x) { return g.index(t, y, x); };

  // A: box across the +-180 seam; B: diagonal staircase; C: long polar strip.
  PlantedComponent a, b, c;
  for (std::size_t t = 1; t <= 3; ++t)
    for (std::size_t y = 2; y <= 3; ++y)
      for (std::size_t x : {22, 23, 0, 1}) a.voxels.push_back(idx(t, y, x));
  for (std::size_t i = 0; i < 5; ++i) b.voxels.push_back(idx(2 + i, 5 + i, 8 + i));
  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t x = 14; x <= 15; ++x) c.voxels.push_back(idx(t, 0, x));

  std::vector<PlantedComponent*> comps{&a, &b, &c};
  const double base[] = {0.02, 0.05, 0.01};
  for (std::size_t k = 0; k < 3; ++k) {
    auto& comp = *comps[k];
    std::sort(comp.voxels.begin(), comp.voxels.end());
    std::vector<double> m;
    for (std::size_t j = 0; j < comp.voxels.size(); ++j) m.push_back(base[k] * (1.0 + 0.1 * static_cast<double>(j % 3)));
    plant(s.gpp, comp, m);
  }
  s.components = {c, a, b};  // id order: by first month, then latitude

  Grid3D tas = s.gpp.like(0.0), pr = s.gpp.like(0.0);
  tas.variable_name = "tas_scaled";
  pr.variable_name = "pr_normalized";
  tas.units = pr.units = "1";
  for (std::size_t t = 0; t < g.ntime(); ++t)
    for (std::size_t y = 0; y < g.nlat(); ++y)
      for (std::size_t x = 0; x < g.nlon(); ++x) {
        tas.at(t, y, x) = std::sin(0.7 * t + 0.3 * y + 0.11 * x);
        pr.at(t, y, x) = 0.01 * std::cos(0.5 * t + 0.2 * y - 0.13 * x);
      }
  for (std::size_t k = 0; k < a.voxels.size(); ++k) tas.values[a.voxels[k]] = 3.0 + 0.1 * static_cast<double>(k);
  for (std::size_t k = 0; k < b.voxels.size(); ++k) pr.values[b.voxels[k]] = -0.03 - 0.001 * static_cast<double>(k);
  s.tas = std::move(tas);
  s.pr = std::move(pr);
  return s;
}

std::vector<std::size_t> zeta_quantile_sizes(std::size_t n, double gamma) {
  const double z = zeta(gamma);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = (static_cast<double>(i) - 0.5) / static_cast<double>(n);
    double cdf = 0.0;
    std::size_t k = 0;
    while (cdf < u) {
      ++k;
      cdf += std::pow(static_cast<double>(k), -gamma) / z;
    }
    sizes.push_back(k);
  }
  return sizes;
}

std::size_t sample_zeta(std::mt19937_64& rng, double gamma) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double b = std::pow(2.0, gamma - 1.0);
  for (;;) {
    const double u = 1.0 - unif(rng);
    const double v = unif(rng);
    const double x = std::floor(std::pow(u, -1.0 / (gamma - 1.0)));
    if (x >= 1e15) continue;
    const double t = std::pow(1.0 + 1.0 / x, gamma - 1.0);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::size_t>(x);
  }
}

PlantedScene powerlaw_planted_scene(std::size_t n, double gamma) {
  PlantedScene s;
  s.gpp = empty_grid(72, 36, 72, 0.0);
  const auto sizes = zeta_quantile_sizes(n, gamma);

  // Slots: 12 time blocks of 6, 4 lat blocks of 8, 9 lon blocks of 8; each
  // event fills a 5 x 7 x 7 interior leaving a one-voxel gap to every other.
  constexpr std::size_t kT = 12, kY = 4, kX = 9;
  std::vector<std::size_t> slots(kT * kY * kX);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  std::mt19937_64 rng(20240611);
  std::shuffle(slots.begin(), slots.end(), rng);
  if (n > slots.size()) throw std::invalid_argument("too many planted events");

  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[i] > 5 * 7 * 7) throw std::invalid_argument("planted event larger than its slot");
    const std::size_t slot = slots[i];
    const std::size_t t0 = (slot / (kY * kX)) * 6, y0 = ((slot / kX) % kY) * 8 + 1, x0 = (slot % kX) * 8 + 1;
    PlantedComponent c;
    for (std::size_t k = 0; k < sizes[i]; ++k) {
      const std::size_t dt = k / 49, dy = (k / 7) % 7, dx = k % 7;
      c.voxels.push_back(s.gpp.index(t0 + dt, y0 + dy, x0 + dx));
    }
    std::sort(c.voxels.begin(), c.voxels.end());
    std::vector<double> m;
    const double dlon = 5.0;
    for (std::size_t v : c.voxels) {
      const std::size_t t = v / s.gpp.ncells(), y = (v % s.gpp.ncells()) / s.gpp.nlon();
      const double area = band_area(s.gpp.axes.lat_edges[y], s.gpp.axes.lat_edges[y + 1], dlon);
      m.push_back(2e-8 * area * 86400.0 * days_in_month(s.gpp.time[t]) / 1e12);
    }
    plant(s.gpp, c, m);
    s.components.push_back(std::move(c));
  }
  std::sort(s.components.begin(), s.components.end(),
            [](const PlantedComponent& a, const PlantedComponent& b) { return a.voxels < b.voxels; });
  return s;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("stx_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<std::pair<std::string, std::string>> snapshot_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.emplace_back(fs::relative(e.path(), dir).generic_string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path data_file(const std::string& name) { return fs::path(STX_TEST_DATA_DIR) / name; }

}  // namespace stx::testing
