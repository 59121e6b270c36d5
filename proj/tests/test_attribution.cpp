#include <doctest.h>

#include <cmath>
#include <random>

#include "stx/attribution.hpp"
#include "stx/errors.hpp"
#include "support/oracles.hpp"

using namespace stx;

namespace {

Grid3D driver(std::size_t nt, std::size_t ny, std::size_t nx, double fill = 0.0) {
  Grid3D g;
  g.units = "1";
  g.time = Grid3D::month_range(MonthIndex::parse("2001-01"), nt);
  g.axes = LatLonAxes::regular(-90, 90, ny, 0, 360, nx);
  g.values.assign(g.size(), fill);
  return g;
}

}  // namespace

TEST_CASE("lagged median of a single voxel") {
  auto d = driver(8, 1, 1);
  for (std::size_t t = 0; t < 8; ++t) d.values[t] = 10.0 * static_cast<double>(t);
  const std::vector<std::size_t> v{5};
  const auto m = lagged_driver_median(d, v, 2);
  CHECK(m.median == 30.0);
  CHECK(m.coverage == 1.0);
}

TEST_CASE("lag truncation at the record start") {
  auto d = driver(4, 1, 2);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = static_cast<double>(i);
  const std::vector<std::size_t> v{0, 1, 2};  // t=0 (two cells) and t=1
  const auto m = lagged_driver_median(d, v, 1);
  CHECK(m.covered == 1);
  CHECK(m.coverage == doctest::Approx(1.0 / 3.0));
  CHECK(m.median == 0.0);
  const auto none = lagged_driver_median(d, std::vector<std::size_t>{0}, 1);
  CHECK(std::isnan(none.median));
  CHECK(none.coverage == 0.0);
}

TEST_CASE("hand median of three shifted values") {
  auto d = driver(2, 1, 3);
  d.values = {1, 9, 2, 0, 0, 0};
  const auto m = lagged_driver_median(d, std::vector<std::size_t>{3, 4, 5}, 1);
  CHECK(m.median == 2.0);
}

TEST_CASE("footprint quartiles of 1..100") {
  auto d = driver(100, 1, 2);
  for (std::size_t t = 0; t < 100; ++t) {
    d.at(t, 0, 0) = static_cast<double>(t + 1);
    d.at(t, 0, 1) = 1000.0;
  }
  const auto q = reference_quartiles(d, std::vector<std::size_t>{d.index(50, 0, 0)}, 0, {});
  CHECK(q.low == doctest::Approx(25.75));
  CHECK(q.high == doctest::Approx(75.25));
}

TEST_CASE("snapshot quartiles use the lag-shifted month's field") {
  auto d = driver(3, 2, 2);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = static_cast<double>(i);
  AttributionConfig cfg;
  cfg.reference = ReferenceMode::GlobalSnapshot;
  const auto q = reference_quartiles(d, std::vector<std::size_t>{d.index(2, 1, 1)}, 1, cfg);
  CHECK(q.low == doctest::Approx(testing::sorted_percentile({4, 5, 6, 7}, 25)));
  CHECK(q.high == doctest::Approx(testing::sorted_percentile({4, 5, 6, 7}, 75)));
}

TEST_CASE("forced warm patch is hot at every lag; uniform fields never flag") {
  auto tas = driver(48, 4, 4), pr = driver(48, 4, 4);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& v : tas.values) v = n(rng);
  for (auto& v : pr.values) v = n(rng);
  std::vector<std::size_t> voxels;
  for (std::size_t t = 6; t < 9; ++t) voxels.push_back(tas.index(t, 1, 1));
  for (std::size_t t = 3; t < 9; ++t) tas.at(t, 1, 1) = 3.0;
  AttributionConfig cfg;
  const auto rec = classify_component(tas, pr, voxels, cfg);
  REQUIRE(rec.lags.size() == 4);
  for (const auto& l : rec.lags) {
    CHECK(l.hot);
    CHECK_FALSE(l.cold);
  }
  const auto flat = driver(48, 4, 4, 0.5);
  for (const auto& l : classify_component(flat, flat, voxels, cfg).lags) {
    CHECK_FALSE((l.hot || l.cold || l.dry || l.wet));
  }
}

TEST_CASE("classification matches the brute-force evaluation") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int scene = 0; scene < 10; ++scene) {
    auto tas = driver(12, 10, 10), pr = driver(12, 10, 10);
    for (auto& v : tas.values) v = n(rng);
    for (auto& v : pr.values) v = n(rng);
    std::vector<std::size_t> voxels;
    const std::size_t t0 = 3 + rng() % 6, y0 = rng() % 7, x0 = rng() % 7;
    for (std::size_t t = t0; t < std::min<std::size_t>(12, t0 + 3); ++t)
      for (std::size_t y = y0; y < y0 + 3; ++y)
        for (std::size_t x = x0; x < x0 + 3; ++x) {
          voxels.push_back(tas.index(t, y, x));
          tas.at(t, y, x) += 1.5;
          pr.at(t, y, x) -= 1.5;
        }
    if (scene % 3 == 0) pr.values[voxels.front()] = std::nan("");
    for (auto mode : {ReferenceMode::FootprintClimatology, ReferenceMode::GlobalSnapshot}) {
      AttributionConfig cfg;
      cfg.reference = mode;
      const auto rec = classify_component(tas, pr, voxels, cfg);
      const auto expected = testing::oracle_classify(tas, pr, voxels, cfg.max_lag, mode);
      REQUIRE(rec.lags.size() == expected.size());
      for (std::size_t lag = 0; lag < expected.size(); ++lag) {
        CHECK(rec.lags[lag].hot == expected[lag].hot);
        CHECK(rec.lags[lag].cold == expected[lag].cold);
        CHECK(rec.lags[lag].dry == expected[lag].dry);
        CHECK(rec.lags[lag].wet == expected[lag].wet);
      }
    }
  }
}

TEST_CASE("table averages lag counts and rounds half up") {
  CHECK(round_half_up(10.5) == 11);
  CHECK(round_half_up(10.49) == 10);
  CHECK(round_half_up(0.0) == 0);

  // Twelve single-voxel components in the last month; the last three drop
  // out of the hot class from lag 3, 2 and 1 on, giving {12, 11, 10, 9}.
  const std::size_t nc = 12, nt = 20;
  auto tas = driver(nt, 1, nc), pr = driver(nt, 1, nc);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t t = 0; t < nt; ++t) tas.at(t, 0, c) = -0.1 * static_cast<double>(t);
  std::vector<std::uint8_t> f(nt * nc, 0);
  for (std::size_t c = 0; c < nc; ++c) f[(nt - 1) * nc + c] = 1;
  const std::size_t drop_from[nc] = {99, 99, 99, 99, 99, 99, 99, 99, 99, 3, 2, 1};
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t lag = 0; lag <= 3; ++lag) tas.at(nt - 1 - lag, 0, c) = lag >= drop_from[c] ? -5.0 : 5.0;
  const auto mask = ExtremeMask::from_flags(nt, 1, nc, f);
  const auto l = label_components(mask, neighborhood("sesd"), false);
  std::vector<ComponentStats> stats;
  for (const auto& info : l.components) {
    ComponentStats s;
    s.id = info.id;
    s.rank = info.id;
    s.voxel_count = 1;
    stats.push_back(s);
  }
  AttributionConfig cfg;
  cfg.top_k = 12;
  const auto t = attribution_table(l, stats, tas, pr, cfg);
  const auto& hot = t.categories[static_cast<int>(Driver::Hot)];
  CHECK(hot.per_lag == std::vector<std::size_t>{12, 11, 10, 9});
  CHECK(hot.mean == 10.5);
  CHECK(hot.rounded == 11);
  CHECK(t.components_used == 12);
  CHECK(t.note.empty());
}

TEST_CASE("shortfall is noted") {
  auto tas = driver(4, 1, 1), pr = driver(4, 1, 1);
  std::vector<std::uint8_t> f(4, 0);
  const auto l = label_components(ExtremeMask::from_flags(4, 1, 1, f), neighborhood("leld"), false);
  const auto t = attribution_table(l, {}, tas, pr, {});
  CHECK(t.components_used == 0);
  CHECK_FALSE(t.note.empty());
  for (const auto& c : t.categories) CHECK(c.mean == 0.0);
}

TEST_CASE("hot and cold never co-occur") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int scene = 0; scene < 200; ++scene) {
    auto tas = driver(6, 3, 3), pr = driver(6, 3, 3);
    for (auto& v : tas.values) v = n(rng);
    for (auto& v : pr.values) v = n(rng);
    std::vector<std::size_t> voxels;
    for (std::size_t i = 0; i < tas.values.size(); ++i)
      if (rng() % 5 == 0) voxels.push_back(i);
    if (voxels.empty()) continue;
    AttributionConfig cfg;
    cfg.reference = scene % 2 ? ReferenceMode::GlobalSnapshot : ReferenceMode::FootprintClimatology;
    for (const auto& l : classify_component(tas, pr, voxels, cfg).lags) {
      CHECK_FALSE((l.hot && l.cold));
      CHECK_FALSE((l.dry && l.wet));
    }
  }
}
