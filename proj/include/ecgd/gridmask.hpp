#ifndef ECGD_GRIDMASK_HPP
#define ECGD_GRIDMASK_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgd/detail/otsu.hpp"
#include "ecgd/raster.hpp"

namespace ecgd {

/// Normalized red-dominance index (R - G/2 - B/2) / (R + G/2 + B/2).
/// Black maps to 0 so ink never reads as grid.
inline double color_index(Rgb p) noexcept {
  const double r = p.r;
  const double gb = 0.5 * p.g + 0.5 * p.b;
  const double den = r + gb;
  return den == 0.0 ? 0.0 : (r - gb) / den;
}

inline IndexImage color_index(const RgbImage& img) {
  IndexImage out(img.width(), img.height());
  std::transform(img.data().begin(), img.data().end(), out.data().begin(),
                 [](Rgb p) { return color_index(p); });
  return out;
}

/// ReLU(x) = (x + |x|) / 2.
inline IndexImage relu_rectify(const IndexImage& idx) {
  IndexImage out = idx;
  for (auto& v : out.data()) v = (v + std::abs(v)) / 2.0;
  return out;
}

inline constexpr std::size_t kIndexBins = 256;

/// Equal-width bin of a value in [0, 1]; out-of-range values clamp.
inline std::size_t index_bin(double v, std::size_t bins = kIndexBins) noexcept {
  const double scaled = std::floor(v * static_cast<double>(bins));
  if (!(scaled > 0.0)) return 0;
  return std::min(bins - 1, static_cast<std::size_t>(scaled));
}

inline std::vector<std::uint64_t> index_histogram(const IndexImage& values,
                                                  std::size_t bins = kIndexBins) {
  std::vector<std::uint64_t> hist(bins, 0);
  for (double v : values.data()) ++hist[index_bin(v, bins)];
  return hist;
}

/**
 * Otsu level of a real image on [0, 1], quantized into `bins` equal bins.
 *
 * The level is expressed on the value axis as split_bin / bins, i.e. the
 * lower edge of the first bin of the upper class.
 */
inline double otsu_threshold_real(const IndexImage& values, std::size_t bins = kIndexBins) {
  if (bins < 2) throw Error(ErrorCode::invalid_argument, "Otsu needs at least two bins");
  const auto hist = index_histogram(values, bins);
  return detail::otsu_split(hist) / static_cast<double>(bins);
}

inline constexpr double kDefaultOtsuScale = 0.5;

/// True where the rectified index reaches `otsu_scale` times its Otsu level.
inline BinaryImage grid_mask(const IndexImage& idx_rectified, double otsu_scale = kDefaultOtsuScale) {
  double level = 0.0;
  try {
    level = otsu_threshold_real(idx_rectified);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_histogram) throw;
    throw Error(ErrorCode::no_grid, "no grid detected: color index histogram is single-valued");
  }
  const double cut = otsu_scale * level;
  BinaryImage mask(idx_rectified.width(), idx_rectified.height());
  auto src = idx_rectified.data();
  auto dst = mask.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] >= cut ? 1 : 0;
  return mask;
}

struct GridEstimate {
  double px_per_mm = 0.0;
  double h_pitch_px = 0.0;  // spacing of vertical lines along the column axis
  double v_pitch_px = 0.0;  // spacing of horizontal lines along the row axis
  std::size_t n_lines_h = 0;
  std::size_t n_lines_v = 0;
};

inline constexpr std::size_t kMinGridLines = 10;
inline constexpr double kSquareGridTolerance = 0.15;

namespace grid_detail {

inline double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Peak positions of a projection: each maximal run of samples above half the
// maximum contributes its count-weighted centroid.
inline std::vector<double> projection_peaks(const std::vector<std::size_t>& proj) {
  std::vector<double> peaks;
  const std::size_t top = *std::max_element(proj.begin(), proj.end());
  if (top == 0) return peaks;
  const double cut = 0.5 * static_cast<double>(top);
  std::size_t i = 0;
  while (i < proj.size()) {
    if (static_cast<double>(proj[i]) <= cut) {
      ++i;
      continue;
    }
    double mass = 0.0;
    double moment = 0.0;
    while (i < proj.size() && static_cast<double>(proj[i]) > cut) {
      mass += static_cast<double>(proj[i]);
      moment += static_cast<double>(proj[i]) * static_cast<double>(i);
      ++i;
    }
    peaks.push_back(moment / mass);
  }
  return peaks;
}

// The median spacing numbers the lines (a gap of about two spacings means a
// line went undetected); a least-squares line through (number, position)
// then gives a sub-pixel pitch.
inline double line_pitch(const std::vector<double>& peaks) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i] - peaks[i - 1]);
  const double rough = median(gaps);
  if (rough <= 0.0) return rough;
  double sn = 0, sp = 0, snn = 0, snp = 0;
  double n = 0.0;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (i > 0) n += std::max(1.0, std::round(gaps[i - 1] / rough));
    const double p = peaks[i];
    sn += n;
    sp += p;
    snn += n * n;
    snp += n * p;
  }
  const double count = static_cast<double>(peaks.size());
  const double den = count * snn - sn * sn;
  if (den <= 0.0) return rough;
  const double slope = (count * snp - sn * sp) / den;
  return slope > 0.0 ? slope : rough;
}

}  // namespace grid_detail

/// Grid pitch from the row and column projections of the grid mask. One grid
/// period is one millimeter.
inline GridEstimate estimate_pitch(const BinaryImage& mask) {
  std::vector<std::size_t> rows(mask.height(), 0);
  std::vector<std::size_t> cols(mask.width(), 0);
  for (std::size_t r = 0; r < mask.height(); ++r) {
    const auto line = mask.row(r);
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (line[c]) {
        ++rows[r];
        ++cols[c];
      }
    }
  }
  const auto row_peaks = grid_detail::projection_peaks(rows);
  const auto col_peaks = grid_detail::projection_peaks(cols);
  if (row_peaks.size() < kMinGridLines || col_peaks.size() < kMinGridLines) {
    throw Error(ErrorCode::too_few_lines,
                "grid mask shows " + std::to_string(col_peaks.size()) + " vertical and " +
                    std::to_string(row_peaks.size()) + " horizontal lines; need at least " +
                    std::to_string(kMinGridLines) + " of each");
  }
  GridEstimate est;
  est.h_pitch_px = grid_detail::line_pitch(col_peaks);
  est.v_pitch_px = grid_detail::line_pitch(row_peaks);
  est.n_lines_h = col_peaks.size();
  est.n_lines_v = row_peaks.size();
  est.px_per_mm = 0.5 * (est.h_pitch_px + est.v_pitch_px);
  if (!(est.px_per_mm > 0.0) ||
      std::abs(est.h_pitch_px - est.v_pitch_px) / est.px_per_mm > kSquareGridTolerance) {
    throw Error(ErrorCode::non_square_grid,
                "grid pitch differs between axes (" + std::to_string(est.h_pitch_px) + " vs " +
                    std::to_string(est.v_pitch_px) + " px); scan rotated or scaled?");
  }
  return est;
}

}  // namespace ecgd

#endif  // ECGD_GRIDMASK_HPP
