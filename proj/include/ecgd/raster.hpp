#ifndef ECGD_RASTER_HPP
#define ECGD_RASTER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ecgd/error.hpp"

namespace ecgd {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};
static_assert(sizeof(Rgb) == 3, "Rgb must pack to byte triplets");

namespace detail {
// Binary images store one byte per pixel (0/1); std::vector<bool> is not
// addressable and much slower to scan.
template <class Pixel>
using storage_t = std::conditional_t<std::is_same_v<Pixel, bool>, std::uint8_t, Pixel>;
}  // namespace detail

/**
 * Row-major raster of `Pixel` values.
 *
 * Pixel (row, col) lives at data()[row * width() + col]. The default
 * constructed image is empty (0x0); every other image has width and height
 * of at least one.
 */
template <class Pixel>
class Image {
 public:
  using pixel_type = Pixel;
  using value_type = detail::storage_t<Pixel>;

  Image() = default;

  Image(std::size_t width, std::size_t height, value_type fill = value_type{})
      : width_(width), height_(height), data_(checked_area(width, height), fill) {}

  Image(std::size_t width, std::size_t height, std::vector<value_type> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_area(width, height)) {
      throw Error(ErrorCode::dimension_mismatch,
                  "pixel buffer length " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(width) + "x" +
                      std::to_string(height));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  value_type& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * width_ + col];
  }
  const value_type& operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * width_ + col];
  }

  std::span<value_type> data() noexcept { return data_; }
  std::span<const value_type> data() const noexcept { return data_; }

  std::span<value_type> row(std::size_t r) noexcept {
    return std::span<value_type>(data_).subspan(r * width_, width_);
  }
  std::span<const value_type> row(std::size_t r) const noexcept {
    return std::span<const value_type>(data_).subspan(r * width_, width_);
  }

  template <class Other>
  bool same_shape(const Image<Other>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_area(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
      throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
    }
    return width * height;
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<value_type> data_;
};

using RgbImage = Image<Rgb>;
using GrayImage = Image<std::uint8_t>;
using BinaryImage = Image<bool>;
using IndexImage = Image<double>;
using LabelMap = Image<std::int32_t>;

/// Rec. 601 luma, rounded half away from zero.
inline std::uint8_t luma(Rgb p) noexcept {
  const double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

inline GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  std::transform(img.data().begin(), img.data().end(), out.data().begin(), luma);
  return out;
}

inline BinaryImage complement(const BinaryImage& img) {
  BinaryImage out = img;
  for (auto& v : out.data()) v = v ? 0 : 1;
  return out;
}

/// Saturating add of a 255-valued mask: masked pixels become white. Masked
/// pixels darker than `keep_below` are left as they are.
inline GrayImage whiteout(const GrayImage& gray, const BinaryImage& mask, int keep_below = 0) {
  if (!gray.same_shape(mask)) {
    throw Error(ErrorCode::dimension_mismatch, "whiteout: gray and mask sizes differ");
  }
  GrayImage out = gray;
  auto dst = out.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (m[i] && dst[i] >= keep_below) dst[i] = 255;
  }
  return out;
}

/// Copy of rows [row_start, row_end] x cols [col_start, col_end], inclusive.
template <class Pixel>
Image<Pixel> crop(const Image<Pixel>& img, std::size_t row_start, std::size_t row_end,
                  std::size_t col_start, std::size_t col_end) {
  if (row_start > row_end || col_start > col_end || row_end >= img.height() ||
      col_end >= img.width()) {
    throw Error(ErrorCode::out_of_range,
                "crop window rows [" + std::to_string(row_start) + "," +
                    std::to_string(row_end) + "] cols [" + std::to_string(col_start) +
                    "," + std::to_string(col_end) + "] outside " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  Image<Pixel> out(col_end - col_start + 1, row_end - row_start + 1);
  for (std::size_t r = row_start; r <= row_end; ++r) {
    auto src = img.row(r).subspan(col_start, out.width());
    std::copy(src.begin(), src.end(), out.row(r - row_start).begin());
  }
  return out;
}

inline std::size_t count_active(const BinaryImage& img) {
  return static_cast<std::size_t>(
      std::count_if(img.data().begin(), img.data().end(), [](auto v) { return v != 0; }));
}

}  // namespace ecgd

#endif  // ECGD_RASTER_HPP
