#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stx/stats.hpp"

namespace stx {

struct SizeDistribution {
  std::vector<std::pair<std::size_t, std::size_t>> counts;  // (size, count), ascending size
  std::size_t total = 0;                                    // M, number of components
  std::size_t n_min = 0, n_max = 0;

  static SizeDistribution from_sizes(std::span<const std::size_t> sizes);
};

/// Histogram of component voxel counts. Throws DomainError when empty.
SizeDistribution size_distribution(std::span<const ComponentStats> stats);

enum class FitMethod {
  LogBinnedLeastSquares,  // default; "logbin"
  MaximumLikelihood,      // continuous Hill-type estimator; "mle"
};

std::string to_string(FitMethod m);
FitMethod parse_fit_method(const std::string& s);

struct FitPoint {
  double size = 0.0;         // representative size of the bin
  double probability = 0.0;  // estimated p(n) per unit size
  std::size_t count = 0;     // components in the bin; the regression weight
};

struct PowerLawFit {
  double gamma = 0.0;
  double log_c = 0.0;      // natural log of the prefactor C
  double r_squared = 0.0;  // of the log-log line (NaN for the MLE)
  FitMethod method = FitMethod::LogBinnedLeastSquares;
  std::size_t n_lo = 0, n_hi = 0;  // size range used
  std::vector<FitPoint> points;    // the log-log points that were fitted
};

inline constexpr std::size_t kMinLogBins = 8;

/// Fits p(n) = C n^-gamma. The log-binned estimator regresses log p against
/// log n by least squares weighted with each point's component count; when there are no more distinct sizes than kMinLogBins each size is
/// its own point (p = count / M), otherwise sizes are grouped into
/// geometric, integer-aligned bins (at least kMinLogBins, 5 per decade) with
/// p = count / (M * integers in bin) at the bin's geometric centre. Empty
/// bins are skipped. Throws DomainError with fewer than 3 distinct sizes.
PowerLawFit powerlaw_fit(const SizeDistribution& d, FitMethod method = FitMethod::LogBinnedLeastSquares);

/// n_min * M^(1 / (gamma - 1)). Throws DomainError unless gamma > 1,
/// M >= 1 and n_min >= 1.
double natural_cutoff(double n_min, double m, double gamma);

}  // namespace stx
