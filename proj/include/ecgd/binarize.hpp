#ifndef ECGD_BINARIZE_HPP
#define ECGD_BINARIZE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "ecgd/detail/otsu.hpp"
#include "ecgd/raster.hpp"

namespace ecgd {

inline std::vector<std::uint64_t> gray_histogram(const GrayImage& img) {
  std::vector<std::uint64_t> hist(256, 0);
  for (auto v : img.data()) ++hist[v];
  return hist;
}

/// Otsu level t in [1, 255]: pixels below t form the dark class.
inline int otsu_threshold_u8(const GrayImage& img) {
  const auto hist = gray_histogram(img);
  return static_cast<int>(std::floor(detail::otsu_split(hist)));
}

/// Otsu level of the pixels outside the grid mask (paper against ink). Masked
/// pixels darker than this are ink crossing a grid line, not grid.
inline int ink_level(const GrayImage& gray, const BinaryImage& grid) {
  if (!gray.same_shape(grid)) throw Error(ErrorCode::dimension_mismatch, "ink_level: gray and mask sizes differ");
  std::vector<std::uint64_t> hist(256, 0);
  auto g = gray.data();
  auto m = grid.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) ++hist[g[i]];
  }
  try {
    return static_cast<int>(std::floor(detail::otsu_split(hist)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_histogram) throw;
    return 0;
  }
}

/// Binarizes a grid-free grayscale sheet with the complement folded in:
/// dark ink becomes the active (true) class.
inline BinaryImage binarize_trace(const GrayImage& gray_no_grid) {
  int level = 0;
  try {
    level = otsu_threshold_u8(gray_no_grid);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_histogram) throw;
    throw Error(ErrorCode::degenerate_histogram, "no trace found: page is a single gray level");
  }
  BinaryImage out(gray_no_grid.width(), gray_no_grid.height());
  auto src = gray_no_grid.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] < level ? 1 : 0;
  return out;
}

}  // namespace ecgd

#endif  // ECGD_BINARIZE_HPP
