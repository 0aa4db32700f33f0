#ifndef ECGD_DETAIL_OTSU_HPP
#define ECGD_DETAIL_OTSU_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "ecgd/error.hpp"

namespace ecgd::detail {

/// Relative slack under which two between-class variances count as tied.
inline constexpr double kOtsuTieTolerance = 1e-10;

/**
 * Otsu split over a histogram whose bin i represents the value i.
 *
 * Candidate split k (1 <= k < bins) puts bins [0, k) in class 0 and [k, bins)
 * in class 1. Returns the mean of every k that attains the maximal
 * between-class variance w0*w1*(mu0 - mu1)^2; a plateau of empty bins
 * between two modes therefore yields its midpoint.
 */
inline double otsu_split(std::span<const std::uint64_t> hist) {
  double total = 0.0;
  double total_sum = 0.0;
  std::size_t nonempty = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    total += static_cast<double>(hist[i]);
    total_sum += static_cast<double>(i) * static_cast<double>(hist[i]);
    if (hist[i] != 0) ++nonempty;
  }
  if (nonempty < 2) {
    throw Error(ErrorCode::degenerate_histogram,
                "histogram has fewer than two distinct values; no threshold exists");
  }

  std::vector<double> sigma(hist.size(), -1.0);
  double best = -1.0;
  double n0 = 0.0;
  double sum0 = 0.0;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    n0 += static_cast<double>(hist[k - 1]);
    sum0 += static_cast<double>(k - 1) * static_cast<double>(hist[k - 1]);
    const double n1 = total - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double w0 = n0 / total;
    const double w1 = n1 / total;
    const double diff = sum0 / n0 - (total_sum - sum0) / n1;
    sigma[k] = w0 * w1 * diff * diff;
    best = std::max(best, sigma[k]);
  }

  double k_sum = 0.0;
  double k_count = 0.0;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    if (sigma[k] >= 0.0 && sigma[k] >= best * (1.0 - kOtsuTieTolerance)) {
      k_sum += static_cast<double>(k);
      k_count += 1.0;
    }
  }
  return k_sum / k_count;
}

}  // namespace ecgd::detail

#endif  // ECGD_DETAIL_OTSU_HPP
