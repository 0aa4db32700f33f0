#ifndef ECGD_SEGMENT_HPP
#define ECGD_SEGMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ecgd/raster.hpp"

namespace ecgd {

struct RowRange {
  std::size_t row_start = 0;
  std::size_t row_end = 0;  // inclusive

  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// One horizontal band of the page holding a single plotted curve.
struct Stripe {
  std::size_t row_start = 0;
  std::size_t row_end = 0;
  BinaryImage image;
  std::size_t lead_index = 0;
};

struct ColumnRoi {
  std::size_t col_start = 0;
  std::size_t col_end = 0;  // inclusive

  std::size_t width() const noexcept { return col_end - col_start + 1; }
  friend bool operator==(const ColumnRoi&, const ColumnRoi&) = default;
};

struct SegmentConfig {
  double prominence_fraction = 0.25;
  double min_band_coverage = 0.5;
  double left_fraction = 1.0 / 3.0;
  double middle_end_fraction = 2.0 / 3.0;
};

/// Mean of each row, so values do not depend on page width.
inline std::vector<double> row_projection(const BinaryImage& img) {
  std::vector<double> proj(img.height(), 0.0);
  for (std::size_t r = 0; r < img.height(); ++r) {
    const auto line = img.row(r);
    const auto n = std::count_if(line.begin(), line.end(), [](auto v) { return v != 0; });
    proj[r] = static_cast<double>(n) / static_cast<double>(img.width());
  }
  return proj;
}

namespace segment_detail {

inline std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
  if (window % 2 == 0) ++window;
  const std::size_t half = window / 2;
  std::vector<double> prefix(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(v.size() - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

inline double prominence(const std::vector<double>& s, std::size_t peak) {
  const double h = s[peak];
  double left_min = h;
  for (std::size_t j = peak; j-- > 0;) {
    if (s[j] > h) break;
    left_min = std::min(left_min, s[j]);
  }
  double right_min = h;
  for (std::size_t j = peak + 1; j < s.size(); ++j) {
    if (s[j] > h) break;
    right_min = std::min(right_min, s[j]);
  }
  return h - std::max(left_min, right_min);
}

inline std::vector<std::size_t> stripe_maxima(const std::vector<double>& s, double pitch_px,
                                              double prominence_fraction) {
  const auto reach = static_cast<std::size_t>(std::max(1.0, std::round(2.0 * pitch_px)));
  const double top = *std::max_element(s.begin(), s.end());
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] <= 0.0) continue;
    bool is_max = true;
    const std::size_t lo = i >= reach ? i - reach : 0;
    const std::size_t hi = std::min(s.size() - 1, i + reach);
    for (std::size_t j = lo; j < i && is_max; ++j) is_max = s[i] > s[j];
    for (std::size_t j = i + 1; j <= hi && is_max; ++j) is_max = s[i] >= s[j];
    if (is_max && prominence(s, i) >= prominence_fraction * top) maxima.push_back(i);
  }
  if (maxima.empty()) throw Error(ErrorCode::no_curves, "no curves found: projection has no maxima");
  return maxima;
}

inline std::vector<RowRange> cut_between(const std::vector<double>& s, const std::vector<std::size_t>& maxima) {
  std::vector<RowRange> out;
  std::size_t start = 0;
  for (std::size_t k = 1; k < maxima.size(); ++k) {
    const std::size_t a = maxima[k - 1] + 1;
    const std::size_t b = maxima[k];
    const auto low = std::min_element(s.begin() + static_cast<std::ptrdiff_t>(a),
                                      s.begin() + static_cast<std::ptrdiff_t>(b));
    const std::size_t first = static_cast<std::size_t>(low - s.begin());
    std::size_t last = first;
    for (std::size_t j = first; j < b; ++j) {
      if (s[j] == *low) last = j;
    }
    const std::size_t cut = (first + last) / 2;
    out.push_back({start, cut});
    start = cut + 1;
  }
  out.push_back({start, s.size() - 1});
  return out;
}

inline std::vector<double> smoothed(const std::vector<double>& proj, double pitch_px) {
  if (!(pitch_px > 0.0)) throw Error(ErrorCode::invalid_argument, "find_stripes: pitch must be positive");
  if (proj.empty()) throw Error(ErrorCode::no_curves, "no curves found: empty projection");
  auto s = moving_average(proj, static_cast<std::size_t>(std::max(1.0, std::round(pitch_px))));
  if (!(*std::max_element(s.begin(), s.end()) > 0.0)) {
    throw Error(ErrorCode::no_curves, "no curves found: projection is empty");
  }
  return s;
}

}  // namespace segment_detail

/**
 * Splits a page into curve bands from its row projection.
 *
 * The projection is smoothed over one grid pitch; maxima must dominate a
 * +-2 pitch neighborhood and stand out by `prominence_fraction` of the
 * smoothed maximum. Each pair of neighboring maxima is separated at the
 * lowest row between them (middle of a tied run), and that row closes the
 * upper band.
 */
inline std::vector<RowRange> find_stripes(const std::vector<double>& proj, double pitch_px,
                                          double prominence_fraction = 0.25) {
  const auto s = segment_detail::smoothed(proj, pitch_px);
  return segment_detail::cut_between(s, segment_detail::stripe_maxima(s, pitch_px, prominence_fraction));
}

/// Fraction of page columns holding ink anywhere in `rows`.
inline double band_coverage(const BinaryImage& page, const RowRange& rows) {
  std::vector<bool> hit(page.width(), false);
  for (std::size_t r = rows.row_start; r <= rows.row_end; ++r) {
    const auto line = page.row(r);
    for (std::size_t c = 0; c < line.size(); ++c) hit[c] = hit[c] || line[c] != 0;
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), true)) / static_cast<double>(page.width());
}

/**
 * find_stripes on a binarized page, then drops the maxima of bands whose ink
 * spans fewer than `min_coverage_fraction` of the widest band's columns (rows
 * of lead labels) and redraws the cuts between the remaining ones.
 */
inline std::vector<RowRange> find_curve_stripes(const BinaryImage& page, double pitch_px,
                                                double prominence_fraction = 0.25,
                                                double min_coverage_fraction = 0.5) {
  const auto s = segment_detail::smoothed(row_projection(page), pitch_px);
  auto maxima = segment_detail::stripe_maxima(s, pitch_px, prominence_fraction);
  if (maxima.size() < 2 || !(min_coverage_fraction > 0.0)) return segment_detail::cut_between(s, maxima);
  const auto bands = segment_detail::cut_between(s, maxima);
  std::vector<double> coverage;
  for (const RowRange& b : bands) coverage.push_back(band_coverage(page, b));
  const double widest = *std::max_element(coverage.begin(), coverage.end());
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    if (coverage[k] >= min_coverage_fraction * widest) kept.push_back(maxima[k]);
  }
  return segment_detail::cut_between(s, kept);
}

inline std::vector<Stripe> make_stripes(const BinaryImage& page, const std::vector<RowRange>& ranges) {
  std::vector<Stripe> out;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    out.push_back({r.row_start, r.row_end, crop(page, r.row_start, r.row_end, 0, page.width() - 1), i});
  }
  return out;
}

/// Per column, the number of vertical black/white transitions.
inline std::vector<std::size_t> edge_projection(const BinaryImage& stripe) {
  std::vector<std::size_t> edges(stripe.width(), 0);
  for (std::size_t r = 0; r + 1 < stripe.height(); ++r) {
    const auto a = stripe.row(r);
    const auto b = stripe.row(r + 1);
    for (std::size_t c = 0; c < edges.size(); ++c) {
      if ((a[c] != 0) != (b[c] != 0)) ++edges[c];
    }
  }
  return edges;
}

/**
 * Region of interest from vanishing intervals of the edge projection.
 *
 * A vanishing interval is a run of at least round(pitch/2) zero columns. The
 * ROI starts after the last such run ending in the left part of the stripe
 * and stops before the first one starting in the middle part.
 */
inline ColumnRoi find_roi_columns(const std::vector<std::size_t>& eproj, double pitch_px,
                                  const SegmentConfig& cfg = {}) {
  if (eproj.empty()) throw Error(ErrorCode::empty_roi, "empty ROI: stripe has no columns");
  const auto min_run = static_cast<std::size_t>(std::max(1.0, std::round(pitch_px / 2.0)));
  const double w = static_cast<double>(eproj.size());
  const double left_end = cfg.left_fraction * w;
  const double middle_end = cfg.middle_end_fraction * w;

  bool have_end = false;
  std::size_t col_start = 0;
  std::size_t col_end = eproj.size() - 1;
  std::size_t i = 0;
  while (i < eproj.size()) {
    if (eproj[i] != 0) {
      ++i;
      continue;
    }
    const std::size_t run_start = i;
    while (i < eproj.size() && eproj[i] == 0) ++i;
    const std::size_t run_end = i - 1;
    if (run_end - run_start + 1 < min_run) continue;
    if (static_cast<double>(run_end) < left_end) {
      col_start = run_end + 1;
    }
    const double s = static_cast<double>(run_start);
    if (!have_end && s >= left_end && s <= middle_end && run_start > 0) {
      col_end = run_start - 1;
      have_end = true;
    }
  }
  const bool any_ink = col_start <= col_end &&
                       std::any_of(eproj.begin() + static_cast<std::ptrdiff_t>(col_start),
                                   eproj.begin() + static_cast<std::ptrdiff_t>(col_end) + 1,
                                   [](std::size_t v) { return v != 0; });
  if (!any_ink) {
    throw Error(ErrorCode::empty_roi, "empty ROI: no edges between the left and middle gaps");
  }
  return {col_start, col_end};
}

inline BinaryImage crop_roi(const Stripe& stripe, const ColumnRoi& roi) {
  return crop(stripe.image, 0, stripe.image.height() - 1, roi.col_start, roi.col_end);
}

}  // namespace ecgd

#endif  // ECGD_SEGMENT_HPP
