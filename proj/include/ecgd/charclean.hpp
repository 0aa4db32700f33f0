#ifndef ECGD_CHARCLEAN_HPP
#define ECGD_CHARCLEAN_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "ecgd/morphology.hpp"
#include "ecgd/raster.hpp"

namespace ecgd {

/// Geometry of printed characters, in millimeters of paper.
struct CharFilterConfig {
  double close_radius_mm = 0.15;
  double max_char_height_mm = 4.0;
  double max_char_width_mm = 4.0;
  double aspect_ratio_lo = 0.2;
  double aspect_ratio_hi = 3.0;
  // Characters sit at least this far above or below the curve's median row.
  double min_centroid_offset_mm = 2.0;

  void validate() const {
    if (!(close_radius_mm > 0 && max_char_height_mm > 0 && max_char_width_mm > 0 &&
          aspect_ratio_lo > 0 && aspect_ratio_hi > aspect_ratio_lo && min_centroid_offset_mm > 0)) {
      throw Error(ErrorCode::invalid_argument, "character filter settings must be positive with lo < hi");
    }
  }
};

struct CharacterScan {
  Labeling labeling;  // of the closed stripe
  std::int32_t curve_label = 0;
  double curve_row = 0.0;
  std::vector<std::int32_t> character_labels;
};

inline double median_row_of(const LabelMap& labels, std::int32_t which) {
  std::vector<std::size_t> per_row(labels.height(), 0);
  std::size_t total = 0;
  for (std::size_t r = 0; r < labels.height(); ++r) {
    for (auto v : labels.row(r)) {
      if (v == which) ++per_row[r];
    }
    total += per_row[r];
  }
  // Rows of the k-th smallest member (0-based), for k = lo and k = hi.
  const std::size_t lo = (total - 1) / 2;
  const std::size_t hi = total / 2;
  double lo_row = 0, hi_row = 0;
  std::size_t seen = 0;
  for (std::size_t r = 0; r < per_row.size(); ++r) {
    if (seen <= lo && lo < seen + per_row[r]) lo_row = static_cast<double>(r);
    if (seen <= hi && hi < seen + per_row[r]) {
      hi_row = static_cast<double>(r);
      break;
    }
    seen += per_row[r];
  }
  return 0.5 * (lo_row + hi_row);
}

inline bool is_character(const Blob& b, double curve_row, double pitch_px, const CharFilterConfig& cfg) {
  const double ar = b.aspect_ratio();
  return static_cast<double>(b.height()) <= cfg.max_char_height_mm * pitch_px &&
         static_cast<double>(b.width()) <= cfg.max_char_width_mm * pitch_px &&
         ar >= cfg.aspect_ratio_lo && ar <= cfg.aspect_ratio_hi &&
         std::abs(b.centroid_row - curve_row) >= cfg.min_centroid_offset_mm * pitch_px;
}

/// Closes the stripe with a small disk, labels it, and classifies every
/// non-curve blob against the character geometry.
inline CharacterScan scan_characters(const BinaryImage& stripe, double pitch_px,
                                     const CharFilterConfig& cfg = {}) {
  if (!(pitch_px > 0.0)) throw Error(ErrorCode::invalid_argument, "pitch must be positive");
  cfg.validate();
  const Disk se{static_cast<int>(std::lround(cfg.close_radius_mm * pitch_px))};
  CharacterScan scan;
  scan.labeling = label(close(stripe, se));
  if (scan.labeling.blobs.empty()) throw Error(ErrorCode::empty_image, "stripe has no active pixels");
  scan.curve_label = scan.labeling.blobs.front().label;
  scan.curve_row = median_row_of(scan.labeling.labels, scan.curve_label);
  for (std::size_t i = 1; i < scan.labeling.blobs.size(); ++i) {
    const Blob& b = scan.labeling.blobs[i];
    if (is_character(b, scan.curve_row, pitch_px, cfg)) scan.character_labels.push_back(b.label);
  }
  return scan;
}

/// Deletes the original pixels lying under character blobs of the closed
/// stripe. Never adds pixels.
inline BinaryImage remove_characters(const BinaryImage& stripe, double pitch_px,
                                     const CharFilterConfig& cfg = {}) {
  const CharacterScan scan = scan_characters(stripe, pitch_px, cfg);
  if (scan.character_labels.empty()) return stripe;
  std::vector<std::uint8_t> doomed(scan.labeling.blobs.size() + 1, 0);
  for (auto l : scan.character_labels) doomed[static_cast<std::size_t>(l)] = 1;
  BinaryImage out = stripe;
  auto lab = scan.labeling.labels.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i] && doomed[static_cast<std::size_t>(lab[i])]) dst[i] = 0;
  }
  return out;
}

}  // namespace ecgd

#endif  // ECGD_CHARCLEAN_HPP
