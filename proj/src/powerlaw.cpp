#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "stx/powerlaw.hpp"

namespace stx {

SizeDistribution SizeDistribution::from_sizes(std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw DomainError("size distribution of zero components");
  std::map<std::size_t, std::size_t> hist;
  for (std::size_t n : sizes) {
    if (n == 0) throw DomainError("component sizes must be positive");
    ++hist[n];
  }
  SizeDistribution d;
  d.counts.assign(hist.begin(), hist.end());
  d.total = sizes.size();
  d.n_min = d.counts.front().first;
  d.n_max = d.counts.back().first;
  return d;
}

SizeDistribution size_distribution(std::span<const ComponentStats> stats) {
  std::vector<std::size_t> sizes;
  sizes.reserve(stats.size());
  for (const auto& s : stats) sizes.push_back(s.voxel_count);
  return SizeDistribution::from_sizes(sizes);
}

std::string to_string(FitMethod m) {
  return m == FitMethod::MaximumLikelihood ? "mle" : "logbin";
}

FitMethod parse_fit_method(const std::string& s) {
  if (s == "logbin") return FitMethod::LogBinnedLeastSquares;
  if (s == "mle") return FitMethod::MaximumLikelihood;
  throw DomainError("unknown power-law fit method '" + s + "'");
}

namespace {

std::vector<FitPoint> log_binned_points(const SizeDistribution& d) {
  const auto m = static_cast<double>(d.total);
  std::vector<FitPoint> pts;
  if (d.counts.size() <= kMinLogBins) {
    for (auto [n, c] : d.counts) pts.push_back({static_cast<double>(n), static_cast<double>(c) / m, c});
    return pts;
  }
  const double lo = static_cast<double>(d.n_min);
  const double hi = static_cast<double>(d.n_max) + 1.0;
  const auto bins = std::max<std::size_t>(kMinLogBins, static_cast<std::size_t>(std::ceil(5.0 * std::log10(hi / lo))));
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(bins));

  // Integer edges e_0 < e_1 < ... ; bin i holds sizes in [e_i, e_{i+1}).
  std::vector<std::size_t> edges{d.n_min};
  for (std::size_t i = 1; i <= bins; ++i) {
    auto e = static_cast<std::size_t>(std::ceil(lo * std::pow(ratio, static_cast<double>(i)) - 1e-9));
    if (i == bins) e = d.n_max + 1;
    if (e > edges.back()) edges.push_back(e);
  }
  std::size_t j = 0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    std::size_t count = 0;
    while (j < d.counts.size() && d.counts[j].first < edges[b + 1]) count += d.counts[j++].second;
    if (count == 0) continue;
    const auto width = static_cast<double>(edges[b + 1] - edges[b]);
    const double centre = std::sqrt(static_cast<double>(edges[b]) * static_cast<double>(edges[b + 1] - 1));
    pts.push_back({centre, static_cast<double>(count) / (m * width), count});
  }
  return pts;
}

}  // namespace

PowerLawFit powerlaw_fit(const SizeDistribution& d, FitMethod method) {
  if (d.counts.size() < 3) throw DomainError("powerlaw_fit: need at least 3 distinct sizes");
  PowerLawFit fit;
  fit.method = method;
  fit.n_lo = d.n_min;
  fit.n_hi = d.n_max;

  if (method == FitMethod::MaximumLikelihood) {
    // Continuous approximation for discrete data, shifted by one half.
    const double xmin = static_cast<double>(d.n_min) - 0.5;
    double sum_log = 0.0;
    for (auto [n, c] : d.counts) sum_log += static_cast<double>(c) * std::log(static_cast<double>(n) / xmin);
    if (!(sum_log > 0.0)) throw DomainError("powerlaw_fit: degenerate sample for the MLE");
    const auto m = static_cast<double>(d.total);
    fit.gamma = 1.0 + m / sum_log;
    fit.log_c = std::log((fit.gamma - 1.0) * std::pow(xmin, fit.gamma - 1.0));
    fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }

  fit.points = log_binned_points(d);
  if (fit.points.size() < 2) throw DomainError("powerlaw_fit: fewer than two non-empty bins");
  // Poisson counts make var(log p) roughly 1 / count.
  double wsum = 0.0, mx = 0.0, my = 0.0;
  for (const auto& p : fit.points) {
    const auto w = static_cast<double>(p.count);
    wsum += w;
    mx += w * std::log(p.size);
    my += w * std::log(p.probability);
  }
  mx /= wsum;
  my /= wsum;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : fit.points) {
    const auto w = static_cast<double>(p.count);
    const double dx = std::log(p.size) - mx, dy = std::log(p.probability) - my;
    sxx += w * dx * dx;
    sxy += w * dx * dy;
    syy += w * dy * dy;
  }
  if (sxx == 0.0) throw DomainError("powerlaw_fit: all fit points share one size");
  const double slope = sxy / sxx;
  fit.gamma = 0.0 - slope;  // no negative zero for flat distributions
  fit.log_c = my - slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double natural_cutoff(double n_min, double m, double gamma) {
  if (!(gamma > 1.0)) throw DomainError("natural_cutoff: gamma must exceed 1");
  if (!(m >= 1.0)) throw DomainError("natural_cutoff: M must be at least 1");
  if (!(n_min >= 1.0)) throw DomainError("natural_cutoff: n_min must be at least 1");
  return n_min * std::pow(m, 1.0 / (gamma - 1.0));
}

}  // namespace stx
