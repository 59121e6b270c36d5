#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "stx/errors.hpp"
#include "stx/grid.hpp"
#include "stx/parallel.hpp"

using namespace stx;

TEST_CASE("cell area of an equatorial half-degree cell") {
  const double r = 6371000.0;
  const double expected = r * r * (0.5 * std::numbers::pi / 180.0) * std::sin(0.5 * std::numbers::pi / 180.0);
  CHECK(cell_area(0.0, 0.5, 0.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(cell_area(0.0, 0.5, 0.5) == doctest::Approx(3.0912e9).epsilon(1e-4));
}

TEST_CASE("cell area of the whole sphere is 4 pi R^2") {
  CHECK(cell_area(-90.0, 90.0, 360.0) == doctest::Approx(4.0 * std::numbers::pi * 6371000.0 * 6371000.0));
  CHECK(cell_area(-90.0, 90.0, 360.0) == doctest::Approx(5.1006e14).epsilon(1e-4));
}

TEST_CASE("degenerate cell bounds are rejected") {
  CHECK_THROWS_AS(cell_area(10.0, 10.0, 0.5), DomainError);
  CHECK_THROWS_AS(cell_area(20.0, 10.0, 0.5), DomainError);
  CHECK_THROWS_AS(cell_area(0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(cell_area(80.0, 91.0, 1.0), DomainError);
}

TEST_CASE("regular axes tile the sphere") {
  const auto axes = LatLonAxes::regular(-90, 90, 18, 0, 360, 36);
  double total = 0.0;
  for (double a : axes.cell_areas()) total += a;
  CHECK(total == doctest::Approx(4.0 * std::numbers::pi * 6371000.0 * 6371000.0).epsilon(1e-12));
  CHECK(axes.is_lon_global());
  CHECK_FALSE(LatLonAxes::regular(-10, 10, 2, 0, 90, 3).is_lon_global());
  CHECK(axes.lat_centers.front() == doctest::Approx(-85.0));
}

TEST_CASE("axes validation catches broken invariants") {
  auto axes = LatLonAxes::regular(-90, 90, 4, 0, 360, 4);
  axes.lat_edges[1] = axes.lat_edges[2];
  CHECK_THROWS_AS(axes.validate(), ValidationError);
  CHECK_THROWS_AS(LatLonAxes::from_edges({-95, 0, 10}, {0, 10}).validate(), ValidationError);
  CHECK_THROWS_AS(LatLonAxes::from_edges({0, 10}, {0, 200, 400}).validate(), ValidationError);
}

TEST_CASE("month seconds follow the Gregorian calendar") {
  CHECK(month_seconds(MonthIndex::from_year_month(2001, 1)) == 2678400.0);
  CHECK(month_seconds(MonthIndex::from_year_month(2001, 2)) == 2419200.0);
  CHECK(month_seconds(MonthIndex::from_year_month(2004, 2)) == 2505600.0);
  CHECK(days_in_month(MonthIndex::from_year_month(1900, 2)) == 28);
  CHECK(days_in_month(MonthIndex::from_year_month(2000, 2)) == 29);
  CHECK(days_in_month(MonthIndex::from_year_month(2013, 11)) == 30);
}

TEST_CASE("month index arithmetic and text form") {
  const auto m = MonthIndex::parse("2001-12");
  CHECK(m.year() == 2001);
  CHECK(m.month() == 12);
  CHECK((m + 1).to_string() == "2002-01");
  CHECK(MonthIndex::parse("2013-12") - MonthIndex::parse("2001-01") == 155);
  CHECK(MonthIndex::parse("1999-03") < m);
  CHECK_THROWS_AS(MonthIndex::parse("2001-13"), DomainError);
  CHECK_THROWS_AS(MonthIndex::parse("2001/01"), DomainError);
}

TEST_CASE("grid validation requires consecutive months") {
  Grid3D g;
  g.axes = LatLonAxes::regular(-90, 90, 1, 0, 360, 1);
  g.time = {MonthIndex::parse("2001-01"), MonthIndex::parse("2001-03")};
  g.values = {1.0, 2.0};
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g.time = Grid3D::month_range(MonthIndex::parse("2001-01"), 2);
  CHECK_NOTHROW(g.validate());
  g.values.push_back(3.0);
  CHECK_THROWS_AS(g.validate(), ValidationError);
}

TEST_CASE("cell series round trip") {
  Grid3D g;
  g.axes = LatLonAxes::regular(-90, 90, 2, 0, 360, 3);
  g.time = Grid3D::month_range(MonthIndex::parse("2001-01"), 4);
  g.values.resize(g.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<double>(i);
  const auto s = g.cell_series(4);
  REQUIRE(s.size() == 4);
  CHECK(s[0] == 4.0);
  CHECK(s[3] == 22.0);
  auto h = g.like(0.0);
  h.set_cell_series(4, s);
  CHECK(h.at(2, 1, 1) == 16.0);
}

TEST_CASE("percentile with linear interpolation") {
  const std::vector<double> v{-5, -4, -3, -2, -1, 0, 1, 2, 3, 4};
  CHECK(percentile(v, 10.0) == doctest::Approx(-4.1).epsilon(1e-12));
  CHECK(percentile(std::vector<double>{1, 2, 3, 4}, 50.0) == 2.5);
  CHECK(percentile(std::vector<double>{7}, 25.0) == 7.0);
  std::vector<double> h(100);
  for (int i = 0; i < 100; ++i) h[i] = i + 1;
  CHECK(percentile(h, 25.0) == doctest::Approx(25.75));
  CHECK(percentile(h, 75.0) == doctest::Approx(75.25));
  CHECK(percentile(h, 0.0) == 1.0);
  CHECK(percentile(h, 100.0) == 100.0);
}

TEST_CASE("percentile skips missing values and rejects bad input") {
  const double nan = std::nan("");
  CHECK(percentile(std::vector<double>{nan, 1, nan, 3}, 50.0) == 2.0);
  CHECK_THROWS_AS(percentile(std::vector<double>{}, 50.0), DomainError);
  CHECK_THROWS_AS(percentile(std::vector<double>{nan}, 50.0), DomainError);
  CHECK_THROWS_AS(percentile(std::vector<double>{1.0}, 101.0), DomainError);
  CHECK(median(std::vector<double>{9, 1, 2}) == 2.0);
}

TEST_CASE("sample standard deviation uses n - 1") {
  CHECK(sample_stddev(std::vector<double>{-1.0, 1.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sample_stddev(std::vector<double>{3.0, 3.0, 3.0}) == 0.0);
  CHECK(std::isnan(sample_stddev(std::vector<double>{1.0})));
}

TEST_CASE("parallel_for visits every index once and propagates errors") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) hits[i]++;
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(100, [](std::size_t b, std::size_t) {
                    if (b == 0) throw DomainError("boom");
                  }),
                  DomainError);
}

TEST_CASE("worker count follows STX_THREADS") {
  ::setenv("STX_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  ::setenv("STX_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  ::unsetenv("STX_THREADS");
  CHECK(worker_count() >= 1);
}
