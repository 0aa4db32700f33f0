#ifndef ECGD_MORPHOLOGY_HPP
#define ECGD_MORPHOLOGY_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "ecgd/raster.hpp"

namespace ecgd {

/// Disk structuring element: offsets with dx*dx + dy*dy <= radius*radius.
struct Disk {
  int radius = 0;

  bool contains(int dy, int dx) const noexcept {
    return dx * dx + dy * dy <= radius * radius;
  }
};

namespace morph_detail {

inline constexpr double kFar = 1e20;

// Exact 1D squared distance transform (lower envelope of parabolas).
// f holds 0 at feature sites and kFar elsewhere; results go to d.
inline void edt_1d(const double* f, std::size_t n, double* d, std::vector<std::size_t>& v,
                   std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [f](std::size_t a, std::size_t b) {
    const double da = static_cast<double>(a);
    const double db = static_cast<double>(b);
    return ((f[a] + da * da) - (f[b] + db * db)) / (2.0 * da - 2.0 * db);
  };
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double diff = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = diff * diff + f[v[k]];
  }
}

/// Squared Euclidean distance from every pixel to the nearest pixel whose
/// value equals `target`.
inline std::vector<double> squared_distance_to(const BinaryImage& img, bool target) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  std::vector<double> dist(w * h);
  auto src = img.data();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    dist[i] = (src[i] != 0) == target ? 0.0 : kFar;
  }
  std::vector<std::size_t> v;
  std::vector<double> z;
  std::vector<double> col_in(h), col_out(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col_in[r] = dist[r * w + c];
    edt_1d(col_in.data(), h, col_out.data(), v, z);
    for (std::size_t r = 0; r < h; ++r) dist[r * w + c] = std::min(col_out[r], kFar);
  }
  std::vector<double> row_out(w);
  for (std::size_t r = 0; r < h; ++r) {
    edt_1d(&dist[r * w], w, row_out.data(), v, z);
    std::copy(row_out.begin(), row_out.end(), dist.begin() + static_cast<std::ptrdiff_t>(r * w));
  }
  return dist;
}

}  // namespace morph_detail

/// Pixels outside the image count as false.
inline BinaryImage dilate(const BinaryImage& img, Disk se) {
  if (se.radius <= 0) return img;
  const auto dist = morph_detail::squared_distance_to(img, true);
  const double r2 = static_cast<double>(se.radius) * se.radius;
  BinaryImage out(img.width(), img.height());
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = dist[i] <= r2 ? 1 : 0;
  return out;
}

/// Pixels outside the image count as false, so a disk that pokes over the
/// border erodes its center.
inline BinaryImage erode(const BinaryImage& img, Disk se) {
  if (se.radius <= 0) return img;
  const auto dist = morph_detail::squared_distance_to(img, false);
  const double r2 = static_cast<double>(se.radius) * se.radius;
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  BinaryImage out(w, h);
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t edge_r = std::min(r + 1, h - r);
    for (std::size_t c = 0; c < w; ++c) {
      const double edge = static_cast<double>(std::min({edge_r, c + 1, w - c}));
      const double d2 = std::min(dist[r * w + c], edge * edge);
      out(r, c) = d2 > r2 ? 1 : 0;
    }
  }
  return out;
}

/**
 * Morphological close on an unbounded blank plane: the image is padded by the
 * disk radius before dilate-then-erode and cropped back afterwards. Eroding
 * inside the original frame would let the false border eat real pixels, and
 * the result would no longer contain the input.
 */
inline BinaryImage close(const BinaryImage& img, Disk se) {
  if (se.radius <= 0) return img;
  const auto pad = static_cast<std::size_t>(se.radius);
  BinaryImage canvas(img.width() + 2 * pad, img.height() + 2 * pad, 0);
  for (std::size_t r = 0; r < img.height(); ++r) {
    const auto src = img.row(r);
    std::copy(src.begin(), src.end(), canvas.row(r + pad).begin() + static_cast<std::ptrdiff_t>(pad));
  }
  const BinaryImage closed = erode(dilate(canvas, se), se);
  return crop(closed, pad, pad + img.height() - 1, pad, pad + img.width() - 1);
}

struct BoundingBox {
  std::size_t min_row = 0;
  std::size_t min_col = 0;
  std::size_t max_row = 0;
  std::size_t max_col = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Connected component with the geometric descriptors used for filtering.
struct Blob {
  std::int32_t label = 0;
  std::size_t area = 0;
  BoundingBox bbox;
  double centroid_row = 0.0;
  double centroid_col = 0.0;

  std::size_t width() const noexcept { return bbox.max_col - bbox.min_col + 1; }
  std::size_t height() const noexcept { return bbox.max_row - bbox.min_row + 1; }
  double aspect_ratio() const noexcept {
    return static_cast<double>(width()) / static_cast<double>(height());
  }
};

struct Labeling {
  LabelMap labels;          // 0 = background, components numbered 1..K
  std::vector<Blob> blobs;  // descending area, ties by ascending label
};

/**
 * 8-connected component labeling.
 *
 * Two raster passes with a union-find equivalence table. Labels are renumbered
 * densely in order of each component's first pixel in row-major order, so the
 * numbering does not depend on how provisional labels were merged.
 */
inline Labeling label(const BinaryImage& img) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  Labeling result;
  result.labels = LabelMap(w, h, 0);
  auto& lab = result.labels;

  std::vector<std::int32_t> parent{0};
  auto find = [&parent](std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  };

  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!img(r, c)) continue;
      std::int32_t current = 0;
      auto visit = [&](std::size_t rr, std::size_t cc) {
        const std::int32_t n = lab(rr, cc);
        if (n == 0) return;
        if (current == 0) {
          current = n;
        } else {
          unite(current, n);
        }
      };
      if (c > 0) visit(r, c - 1);
      if (r > 0) {
        if (c > 0) visit(r - 1, c - 1);
        visit(r - 1, c);
        if (c + 1 < w) visit(r - 1, c + 1);
      }
      if (current == 0) {
        current = static_cast<std::int32_t>(parent.size());
        parent.push_back(current);
      }
      lab(r, c) = current;
    }
  }

  std::vector<std::int32_t> dense(parent.size(), 0);
  std::int32_t next = 0;
  struct Acc {
    std::size_t area = 0;
    double sum_r = 0, sum_c = 0;
    BoundingBox box{std::numeric_limits<std::size_t>::max(),
                    std::numeric_limits<std::size_t>::max(), 0, 0};
  };
  std::vector<Acc> acc;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      std::int32_t& v = lab(r, c);
      if (v == 0) continue;
      const std::int32_t root = find(v);
      if (dense[root] == 0) {
        dense[root] = ++next;
        acc.emplace_back();
      }
      v = dense[root];
      Acc& a = acc[v - 1];
      ++a.area;
      a.sum_r += static_cast<double>(r);
      a.sum_c += static_cast<double>(c);
      a.box.min_row = std::min(a.box.min_row, r);
      a.box.min_col = std::min(a.box.min_col, c);
      a.box.max_row = std::max(a.box.max_row, r);
      a.box.max_col = std::max(a.box.max_col, c);
    }
  }

  result.blobs.reserve(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const Acc& a = acc[i];
    const double n = static_cast<double>(a.area);
    result.blobs.push_back(
        {static_cast<std::int32_t>(i + 1), a.area, a.box, a.sum_r / n, a.sum_c / n});
  }
  std::stable_sort(result.blobs.begin(), result.blobs.end(),
                   [](const Blob& a, const Blob& b) { return a.area > b.area; });
  return result;
}

/// Mask of the pixels carrying `which` in a label map.
inline BinaryImage select_label(const LabelMap& labels, std::int32_t which) {
  BinaryImage out(labels.width(), labels.height());
  auto src = labels.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] == which ? 1 : 0;
  return out;
}

}  // namespace ecgd

#endif  // ECGD_MORPHOLOGY_HPP
