#ifndef ECGD_TRACE_HPP
#define ECGD_TRACE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ecgd/morphology.hpp"
#include "ecgd/raster.hpp"
#include "ecgd/segment.hpp"

namespace ecgd {

/// One row coordinate per column of a thinned curve; nullopt marks a column
/// where the curve vanished.
struct ColumnTrace {
  std::vector<std::optional<double>> rows;
  std::size_t col_offset = 0;  // page column of rows[0]
  std::size_t row_offset = 0;  // page row of stripe row 0

  std::size_t width() const noexcept { return rows.size(); }
  bool complete() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.has_value(); });
  }
};

inline constexpr double kCurveCloseRadiusMm = 1.0;
inline constexpr double kGapWindowMm = 2.0;

/// Groups curve pieces lying within two disk radii of each other (they share a
/// component of the dilation the close starts from), keeps the largest group,
/// and uses it as a mask over the original stripe.
inline BinaryImage clean_curve(const BinaryImage& stripe, double pitch_px,
                               double close_radius_mm = kCurveCloseRadiusMm) {
  if (stripe.empty()) throw Error(ErrorCode::empty_image, "clean_curve: empty stripe");
  const Disk se{static_cast<int>(std::lround(close_radius_mm * pitch_px))};
  const Labeling lab = label(dilate(stripe, se));
  if (lab.blobs.empty()) throw Error(ErrorCode::empty_image, "clean_curve: stripe has no active pixels");
  const std::int32_t keep = lab.blobs.front().label;
  BinaryImage out = stripe;
  auto l = lab.labels.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (l[i] != keep) dst[i] = 0;
  }
  return out;
}

inline ColumnRoi tight_bounds(const BinaryImage& img) {
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t c = 0; c < img.width(); ++c) {
    for (std::size_t r = 0; r < img.height(); ++r) {
      if (img(r, c)) {
        if (!first) first = c;
        last = c;
        break;
      }
    }
  }
  if (!first) throw Error(ErrorCode::empty_image, "tight_bounds: image has no active pixels");
  return {*first, last};
}

/// First active row of every column, scanning top to bottom.
inline ColumnTrace thin_topmost(const BinaryImage& img) {
  ColumnTrace tr;
  tr.rows.assign(img.width(), std::nullopt);
  for (std::size_t c = 0; c < img.width(); ++c) {
    for (std::size_t r = 0; r < img.height(); ++r) {
      if (img(r, c)) {
        tr.rows[c] = static_cast<double>(r);
        break;
      }
    }
  }
  return tr;
}

/// Median with even counts averaging the two central values.
inline double median_of(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::invalid_argument, "median of an empty set");
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

/**
 * Replaces every missing column by the median of the valid rows within
 * +-window columns (clipped to the trace). A window that holds no valid
 * column is doubled until it does.
 */
inline ColumnTrace fill_gaps(const ColumnTrace& tr, std::size_t window_px) {
  if (window_px < 1) throw Error(ErrorCode::invalid_argument, "fill_gaps: window must be >= 1");
  if (std::none_of(tr.rows.begin(), tr.rows.end(), [](const auto& r) { return r.has_value(); })) {
    throw Error(ErrorCode::missing_values, "fill_gaps: trace has no valid column");
  }
  ColumnTrace out = tr;
  const std::size_t n = tr.rows.size();
  std::vector<double> pool;
  for (std::size_t c = 0; c < n; ++c) {
    if (tr.rows[c]) continue;
    for (std::size_t w = window_px;; w *= 2) {
      pool.clear();
      const std::size_t lo = c >= w ? c - w : 0;
      const std::size_t hi = std::min(n - 1, c + w);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (tr.rows[j]) pool.push_back(*tr.rows[j]);
      }
      if (!pool.empty()) break;
    }
    out.rows[c] = median_of(pool);
  }
  return out;
}

}  // namespace ecgd

#endif  // ECGD_TRACE_HPP
