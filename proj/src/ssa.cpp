#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "stx/preprocess.hpp"

namespace stx {

namespace {

// cos/sin of 2*pi*m/n for m = 0..n-1; DFT phases index this table by (k*t) mod n.
struct PhaseTable {
  explicit PhaseTable(std::size_t n) : cos(n), sin(n) {
    for (std::size_t m = 0; m < n; ++m) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      cos[m] = std::cos(phase);
      sin[m] = std::sin(phase);
    }
  }
  std::vector<double> cos, sin;
};

// Periodogram argmax over the non-negative DFT frequencies k / n.
std::size_t periodogram_argmax(std::span<const double> x, const PhaseTable& tab) {
  const std::size_t n = x.size();
  std::size_t best_k = 0;
  double best = -1.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t m = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += x[t] * tab.cos[m];
      im -= x[t] * tab.sin[m];
      m += k;
      if (m >= n) m -= n;
    }
    const double power = re * re + im * im;
    // Ties keep the lowest frequency.
    if (power > best * (1.0 + 1e-12)) {
      best = power;
      best_k = k;
    }
  }
  return best_k;
}

SsaGroup classify(double freq, std::size_t n, const SsaOptions& o) {
  // Periods at or beyond the record length are unresolvable, so they count as trend too.
  if (freq < o.trend_cutoff || freq * static_cast<double>(n) <= 1.0 + 1e-9) return SsaGroup::Trend;
  const double half_bin = 0.5 / static_cast<double>(n);
  for (int h = 1; h <= o.annual_harmonics; ++h) {
    if (std::abs(freq - h / o.annual_period) <= half_bin + 1e-12) return SsaGroup::Annual;
  }
  return SsaGroup::Anomaly;
}

}  // namespace

std::size_t default_ssa_window(std::size_t series_length) { return (series_length / 2) / 12 * 12; }

SsaDecomposition ssa_decompose(std::span<const double> series, const SsaOptions& opts) {
  const std::size_t T = series.size();
  if (T < 24) throw DomainError("ssa_decompose: series needs at least 24 months");
  for (double v : series) {
    if (std::isnan(v)) throw DomainError("ssa_decompose: series contains missing values");
  }
  const std::size_t L = opts.window == 0 ? default_ssa_window(T) : opts.window;
  if (L < 12 || L > T / 2) throw DomainError("ssa_decompose: window must satisfy 12 <= L <= T/2");
  const std::size_t K = T - L + 1;

  SsaDecomposition out;
  out.window_length = L;
  out.trend.assign(T, 0.0);
  out.annual.assign(T, 0.0);
  out.anomaly.assign(T, 0.0);

  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
  if (*mn == *mx) {
    std::fill(out.trend.begin(), out.trend.end(), *mn);
    return out;
  }

  // Embed the centred series; the mean is returned with the trend.
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(T);
  Eigen::MatrixXd X(L, K);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < K; ++j) X(i, j) = series[i + j] - mean;
  }
  const Eigen::MatrixXd S = X * X.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success) throw DomainError("ssa_decompose: eigen-decomposition failed");

  const PhaseTable rc_phase(T), u_phase(L);
  std::vector<double> rc(T), u(L);
  for (std::size_t r = 0; r < L; ++r) {
    const auto idx = static_cast<Eigen::Index>(L - 1 - r);  // descending eigenvalue
    const Eigen::VectorXd uvec = solver.eigenvectors().col(idx);
    const Eigen::VectorXd v = X.transpose() * uvec;

    // Diagonal averaging of u v^T.
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t i_lo = t >= K ? t - K + 1 : 0;
      const std::size_t i_hi = std::min(L - 1, t);
      double s = 0.0;
      for (std::size_t i = i_lo; i <= i_hi; ++i) s += uvec(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(t - i));
      rc[t] = s / static_cast<double>(i_hi - i_lo + 1);
    }
    for (std::size_t i = 0; i < L; ++i) u[i] = uvec(static_cast<Eigen::Index>(i));

    Eigentriple et;
    et.eigenvalue = std::max(0.0, solver.eigenvalues()(idx));
    et.eigenvector_frequency = static_cast<double>(periodogram_argmax(u, u_phase)) / static_cast<double>(L);
    et.component_frequency = static_cast<double>(periodogram_argmax(rc, rc_phase)) / static_cast<double>(T);
    et.group = classify(et.component_frequency, T, opts);
    out.spectrum.push_back(et);

    auto& target = et.group == SsaGroup::Trend ? out.trend : et.group == SsaGroup::Annual ? out.annual : out.anomaly;
    if (et.group != SsaGroup::Anomaly) {
      for (std::size_t t = 0; t < T; ++t) target[t] += rc[t];
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    out.trend[t] += mean;
    out.anomaly[t] = series[t] - out.trend[t] - out.annual[t];
  }
  return out;
}

}  // namespace stx
