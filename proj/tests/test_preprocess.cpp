#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "stx/errors.hpp"
#include "stx/preprocess.hpp"

using namespace stx;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::vector<double> series(std::size_t n, auto f) {
  std::vector<double> v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = f(static_cast<double>(t));
  return v;
}

double max_recon_error(const std::vector<double>& x, const SsaDecomposition& d) {
  double err = 0.0, scale = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    err = std::max(err, std::abs(d.trend[t] + d.annual[t] + d.anomaly[t] - x[t]));
    scale = std::max(scale, std::abs(x[t]));
  }
  return err / std::max(scale, 1e-300);
}

Grid3D grid_of(const std::vector<std::vector<double>>& cells) {
  Grid3D g;
  g.units = "kg m-2 s-1";
  g.time = Grid3D::month_range(MonthIndex::parse("2001-01"), cells.front().size());
  g.axes = LatLonAxes::regular(-90, 90, 1, 0, 360, cells.size());
  g.values.resize(g.size());
  for (std::size_t c = 0; c < cells.size(); ++c) g.set_cell_series(c, cells[c]);
  return g;
}

}  // namespace

TEST_CASE("default window is the largest multiple of 12 up to T/2") {
  CHECK(default_ssa_window(156) == 72);
  CHECK(default_ssa_window(24) == 12);
  CHECK(default_ssa_window(47) == 12);
  CHECK(default_ssa_window(48) == 24);
}

TEST_CASE("pure annual harmonic lands in the annual group") {
  const auto x = series(156, [](double t) { return 10.0 * std::sin(kTwoPi * t / 12.0); });
  const auto d = ssa_decompose(x, {.window = 72});
  CHECK(d.window_length == 72);
  CHECK(sum_sq(d.annual) / sum_sq(x) >= 0.999);
  double worst = 0.0;
  for (double a : d.anomaly) worst = std::max(worst, std::abs(a));
  CHECK(worst <= 1e-6 * 10.0);
  CHECK(max_recon_error(x, d) <= 1e-9);
}

TEST_CASE("pure ramp lands in the trend group") {
  const auto x = series(156, [](double t) { return 0.01 * t; });
  const auto d = ssa_decompose(x);
  CHECK(sum_sq(d.trend) / sum_sq(x) >= 0.999);
  CHECK(max_recon_error(x, d) <= 1e-9);
}

TEST_CASE("noisy ramp plus sine is separated within tolerance") {
  const double amp = 1.0, sigma = 0.1 * amp;
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, sigma);
  const std::size_t T = 156;
  std::vector<double> ramp(T), sine(T), x(T);
  for (std::size_t t = 0; t < T; ++t) {
    ramp[t] = 0.01 * static_cast<double>(t);
    sine[t] = amp * std::sin(kTwoPi * static_cast<double>(t) / 12.0);
    x[t] = ramp[t] + sine[t] + noise(rng);
  }
  const auto d = ssa_decompose(x);
  const std::size_t lo = T / 10, hi = T - T / 10;
  double et = 0.0, ea = 0.0;
  for (std::size_t t = lo; t < hi; ++t) {
    et += (d.trend[t] - ramp[t]) * (d.trend[t] - ramp[t]);
    ea += (d.annual[t] - sine[t]) * (d.annual[t] - sine[t]);
  }
  const double n = static_cast<double>(hi - lo);
  const double bound = 0.15 * sigma * std::sqrt(static_cast<double>(T));
  CHECK(std::sqrt(et / n) <= bound);
  CHECK(std::sqrt(ea / n) <= bound);
  CHECK(max_recon_error(x, d) <= 1e-9);
}

TEST_CASE("slow and annual oscillations separate") {
  const std::size_t T = 156;
  const auto fast = series(T, [](double t) { return std::sin(kTwoPi * t / 12.0); });
  const auto slow = series(T, [](double t) { return std::sin(kTwoPi * t / 240.0); });
  std::vector<double> x(T);
  for (std::size_t t = 0; t < T; ++t) x[t] = fast[t] + slow[t];
  const auto d = ssa_decompose(x);
  double ea = 0.0, et = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    ea += (d.annual[t] - fast[t]) * (d.annual[t] - fast[t]);
    et += (d.trend[t] - slow[t]) * (d.trend[t] - slow[t]);
  }
  CHECK(1.0 - ea / sum_sq(fast) >= 0.99);
  CHECK(1.0 - et / sum_sq(slow) >= 0.90);
}

TEST_CASE("groups partition the spectrum") {
  const auto x = series(120, [](double t) { return 0.02 * t + std::cos(kTwoPi * t / 6.0) + std::sin(t * 0.9); });
  const auto d = ssa_decompose(x);
  CHECK(d.spectrum.size() == d.window_length);
  for (std::size_t i = 1; i < d.spectrum.size(); ++i) CHECK(d.spectrum[i - 1].eigenvalue >= d.spectrum[i].eigenvalue);
  std::size_t trend = 0, annual = 0, anomaly = 0;
  for (const auto& e : d.spectrum) {
    trend += e.group == SsaGroup::Trend;
    annual += e.group == SsaGroup::Annual;
    anomaly += e.group == SsaGroup::Anomaly;
  }
  CHECK(trend + annual + anomaly == d.spectrum.size());
  CHECK(trend >= 1);
  CHECK(annual >= 2);
}

TEST_CASE("adding a constant only moves the trend") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.3);
  auto x = series(156, [&](double t) { return std::sin(kTwoPi * t / 12.0) + n(rng); });
  const auto a = ssa_decompose(x);
  for (auto& v : x) v += 5.0;
  const auto b = ssa_decompose(x);
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(b.anomaly[t] == doctest::Approx(a.anomaly[t]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("ssa rejects unusable series") {
  CHECK_THROWS_AS(ssa_decompose(std::vector<double>(20, 1.0)), DomainError);
  auto x = series(48, [](double t) { return t; });
  x[3] = std::nan("");
  CHECK_THROWS_AS(ssa_decompose(x), DomainError);
  CHECK_THROWS_AS(ssa_decompose(series(48, [](double t) { return t; }), {.window = 30}), DomainError);
}

TEST_CASE("anomalies of trend plus annual signal vanish") {
  const auto a = series(156, [](double t) { return 2.0 + 0.01 * t + std::sin(kTwoPi * t / 12.0); });
  const auto b = series(156, [](double t) { return 1.0 + 0.5 * std::cos(kTwoPi * t / 12.0); });
  std::vector<double> gap = a;
  gap[10] = std::nan("");
  const auto g = grid_of({a, b, gap});
  const auto an = compute_anomalies(g);
  CHECK(an.variable_name.ends_with("_anomaly"));
  for (std::size_t t = 0; t < 156; ++t) {
    CHECK(std::abs(an.at(t, 0, 0)) <= 1e-6 * 3.0);
    CHECK(std::abs(an.at(t, 0, 1)) <= 1e-6 * 1.5);
    CHECK(std::isnan(an.at(t, 0, 2)));
  }
}

TEST_CASE("grid anomalies equal the per-series decomposition") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto x = series(72, [&](double t) { return std::sin(kTwoPi * t / 12.0) + n(rng); });
  const auto an = compute_anomalies(grid_of({x}));
  const auto d = ssa_decompose(x);
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(an.values[t] == d.anomaly[t]);
}

TEST_CASE("temperature scaling yields unit variance") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  const auto x = series(96, [&](double t) { return 280.0 + 5.0 * std::sin(kTwoPi * t / 12.0) + n(rng); });
  const auto constant = std::vector<double>(96, 270.0);
  const auto scaled = scale_temperature(grid_of({x, constant}));
  CHECK(scaled.grid.units == "1");
  REQUIRE(scaled.flagged_cells == std::vector<std::size_t>{1});
  const auto s0 = scaled.grid.cell_series(0);
  CHECK(sample_stddev(s0) == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : scaled.grid.cell_series(1)) CHECK(v == 0.0);

  // The scaled value is the anomaly divided by its own standard deviation.
  const auto d = ssa_decompose(x);
  const double sigma = sample_stddev(d.anomaly);
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(s0[t] == doctest::Approx(d.anomaly[t] / sigma).epsilon(1e-12));
}

TEST_CASE("temperature scaling divides an anomaly of sigma 2 by 2") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  auto x = series(96, [&](double t) { return 0.03 * t + std::cos(kTwoPi * t / 12.0) + n(rng); });
  // SSA is linear, so rescaling the input rescales the anomaly to sigma 2.
  const double k = 2.0 / sample_stddev(ssa_decompose(x).anomaly);
  for (auto& v : x) v *= k;
  const auto d = ssa_decompose(x);
  REQUIRE(sample_stddev(d.anomaly) == doctest::Approx(2.0).epsilon(1e-9));
  const auto scaled = scale_temperature(grid_of({x}));
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(scaled.grid.values[t] == doctest::Approx(d.anomaly[t] / 2.0).epsilon(1e-9));
}

TEST_CASE("precipitation normalisation keeps the annual cycle") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto x = series(96, [&](double t) { return 50.0 + 0.1 * t + 20.0 * std::sin(kTwoPi * t / 12.0) + n(rng); });
  const auto c = std::vector<double>(96, 3.0);
  const auto z = std::vector<double>(96, 0.0);
  const auto out = normalize_precip(grid_of({x, c, z}));
  CHECK(out.flagged_cells == std::vector<std::size_t>{2});
  const auto d = ssa_decompose(x);
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    CHECK(out.grid.at(t, 0, 0) == doctest::Approx((x[t] - d.trend[t]) / total).epsilon(1e-12));
    CHECK(std::abs(out.grid.at(t, 0, 1)) <= 1e-9);
    CHECK(out.grid.at(t, 0, 2) == 0.0);
  }
  CHECK(variance(out.grid.cell_series(0)) > 0.0);
}
