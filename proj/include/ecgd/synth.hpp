#ifndef ECGD_SYNTH_HPP
#define ECGD_SYNTH_HPP

// Synthetic ECG sheets with exact ground truth, plus the blur / desaturation
// / rotation distortions used for stress testing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ecgd/raster.hpp"
#include "ecgd/morphology.hpp"
#include "ecgd/segment.hpp"

namespace ecgd {

struct LeadSpec {
  std::string name;
  std::vector<double> samples_mv;
  double ms_per_sample = 1.0;
};

enum class GlyphLayout { below, left };

struct SheetSpec {
  double px_per_mm = 23.622;
  Rgb grid_color{244, 188, 188};
  int grid_heavy_every = 5;
  Rgb grid_heavy_color{236, 130, 130};
  Rgb paper_color{252, 250, 248};
  Rgb ink_color{20, 20, 20};
  int stroke_width_px = 3;
  std::vector<LeadSpec> leads;
  double stripe_height_mm = 25.0;
  bool label_glyphs = true;
  GlyphLayout glyph_layout = GlyphLayout::below;

  double mv_per_mm = 0.1;
  double ms_per_mm = 40.0;
  double margin_x_mm = 10.0;
  double margin_y_mm = 5.0;
  // Baseline position inside each lead's slot, as a fraction from its top.
  double baseline_fraction = 0.6;
  double glyph_height_mm = 2.5;
  double glyph_offset_mm = 3.0;

  void validate() const {
    if (!(px_per_mm > 0) || !(mv_per_mm > 0) || !(ms_per_mm > 0) || !(stripe_height_mm > 0)) {
      throw Error(ErrorCode::invalid_argument, "sheet scales must be positive");
    }
    if (stroke_width_px < 1) throw Error(ErrorCode::invalid_argument, "stroke width must be >= 1");
    if (grid_heavy_every < 1) throw Error(ErrorCode::invalid_argument, "grid_heavy_every must be >= 1");
    if (leads.empty()) throw Error(ErrorCode::invalid_argument, "sheet needs at least one lead");
    for (const auto& l : leads) {
      if (l.samples_mv.size() < 2 || !(l.ms_per_sample > 0)) {
        throw Error(ErrorCode::invalid_argument, "lead '" + l.name + "' needs >= 2 samples and a positive rate");
      }
    }
    if (!(baseline_fraction > 0 && baseline_fraction < 1)) {
      throw Error(ErrorCode::invalid_argument, "baseline_fraction must lie in (0, 1)");
    }
  }
};

struct LeadTruth {
  std::string name;
  RowRange slot;               // page rows reserved for this lead
  double baseline_row = 0.0;
  std::size_t col_start = 0;   // page column of centerline[0]
  std::vector<double> centerline;  // exact polyline row at each column
  std::size_t glyph_pixels = 0;
  std::optional<BoundingBox> glyph_box;

  /// Centerline row at page column `col`, if the curve covers it.
  std::optional<double> row_at(std::size_t col) const {
    if (col < col_start || col - col_start >= centerline.size()) return std::nullopt;
    return centerline[col - col_start];
  }
};

struct GroundTruth {
  double px_per_mm = 0.0;
  double mv_per_mm = 0.0;
  double ms_per_mm = 0.0;
  int stroke_width_px = 0;
  std::vector<LeadTruth> leads;
  BinaryImage trace_mask;
  BinaryImage glyph_mask;
  BinaryImage grid_only_mask;
};

struct Sheet {
  RgbImage image;
  GroundTruth truth;
};

// --- signal generator -------------------------------------------------------

struct Sinusoid {
  double freq_hz = 1.0;
  double amp_mv = 0.0;
  double phase_rad = 0.0;
};

/// Gaussian beats standing in for QRS complexes.
struct QrsTrain {
  double rate_bpm = 75.0;
  double amp_mv = 1.0;
  double sigma_ms = 25.0;
  double first_ms = 300.0;
};

struct SignalRecipe {
  double duration_ms = 4000.0;
  double ms_per_sample = 1.0;
  std::vector<Sinusoid> components;
  std::optional<QrsTrain> qrs;
};

inline std::vector<double> generate_signal(const SignalRecipe& recipe) {
  if (!(recipe.duration_ms > 0) || !(recipe.ms_per_sample > 0)) {
    throw Error(ErrorCode::invalid_argument, "signal duration and rate must be positive");
  }
  const auto n = static_cast<std::size_t>(std::floor(recipe.duration_ms / recipe.ms_per_sample)) + 1;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t_ms = static_cast<double>(i) * recipe.ms_per_sample;
    double v = 0.0;
    for (const auto& s : recipe.components) {
      v += s.amp_mv * std::sin(2.0 * std::numbers::pi * s.freq_hz * t_ms / 1000.0 + s.phase_rad);
    }
    if (recipe.qrs) {
      const auto& q = *recipe.qrs;
      const double period = 60000.0 / q.rate_bpm;
      // Nearest beats on both sides cover any overlap at sane rates.
      const double k = std::round((t_ms - q.first_ms) / period);
      for (double j = k - 1; j <= k + 1; j += 1.0) {
        const double dt = t_ms - (q.first_ms + j * period);
        v += q.amp_mv * std::exp(-0.5 * dt * dt / (q.sigma_ms * q.sigma_ms));
      }
    }
    out[i] = v;
  }
  return out;
}

// --- dot-matrix font --------------------------------------------------------

namespace synth_detail {

struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;  // 5 bits per row, MSB = leftmost
};

inline const std::array<Glyph, 38>& font() {
  static const std::array<Glyph, 38> table = {{
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
  }};
  return table;
}

inline const Glyph* find_glyph(char ch) {
  for (const auto& g : font()) {
    if (g.ch == ch) return &g;
  }
  if (ch >= 'b' && ch <= 'z') return find_glyph(static_cast<char>(ch - 'a' + 'A'));
  return nullptr;  // rendered as a blank cell
}

struct GlyphMetrics {
  double dot_pitch = 0.0;
  int dot_size = 1;
  double advance = 0.0;  // per character: 5 dot columns plus 2 blank

  static GlyphMetrics for_height(double height_px) {
    GlyphMetrics m;
    m.dot_pitch = height_px / 7.0;
    m.dot_size = std::max(1, static_cast<int>(std::lround(0.75 * m.dot_pitch)));
    m.advance = 7.0 * m.dot_pitch;
    return m;
  }

  double text_width(std::size_t chars) const {
    return chars == 0 ? 0.0 : static_cast<double>(chars - 1) * advance + 4.0 * dot_pitch + dot_size;
  }
  double text_height() const { return 6.0 * dot_pitch + dot_size; }
};

// Pixel cells covered by `text` with its top-left corner at (top, left).
inline std::vector<std::pair<long, long>> glyph_cells(const std::string& text, double top, double left,
                                                      const GlyphMetrics& m) {
  std::vector<std::pair<long, long>> cells;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const Glyph* g = find_glyph(text[k]);
    if (!g) continue;
    const double x0 = left + static_cast<double>(k) * m.advance;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (!((g->rows[static_cast<std::size_t>(row)] >> (4 - col)) & 1)) continue;
        const long r0 = std::lround(top + row * m.dot_pitch);
        const long c0 = std::lround(x0 + col * m.dot_pitch);
        for (long dr = 0; dr < m.dot_size; ++dr) {
          for (long dc = 0; dc < m.dot_size; ++dc) cells.emplace_back(r0 + dr, c0 + dc);
        }
      }
    }
  }
  return cells;
}

inline double segment_distance_sq(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px;
  const double ey = ay + t * dy - py;
  return ex * ex + ey * ey;
}

}  // namespace synth_detail

/**
 * Renders a sheet: paper, a 1 mm grid (1 px lines, darker every
 * `grid_heavy_every` mm), one stroked curve per lead in its own slot, and
 * optional dot-matrix lead names. Coordinates are pixel centers; the exact
 * polyline row at every covered column is recorded as ground truth.
 */
inline Sheet render_sheet(const SheetSpec& spec) {
  spec.validate();
  using synth_detail::GlyphMetrics;
  const double ppm = spec.px_per_mm;
  const auto glyph = GlyphMetrics::for_height(spec.glyph_height_mm * ppm);

  double curve_x0 = spec.margin_x_mm * ppm;
  if (spec.label_glyphs && spec.glyph_layout == GlyphLayout::left) {
    std::size_t longest = 0;
    for (const auto& l : spec.leads) longest = std::max(longest, l.name.size());
    curve_x0 += glyph.text_width(longest) + 3.0 * ppm;
  }
  curve_x0 = std::round(curve_x0);
  double longest_px = 0.0;
  for (const auto& l : spec.leads) {
    const double dur_ms = static_cast<double>(l.samples_mv.size() - 1) * l.ms_per_sample;
    longest_px = std::max(longest_px, dur_ms / spec.ms_per_mm * ppm);
  }
  const auto width = static_cast<std::size_t>(std::ceil(curve_x0 + longest_px + spec.margin_x_mm * ppm)) + 1;
  const double slot_h = spec.stripe_height_mm * ppm;
  const auto height = static_cast<std::size_t>(
      std::ceil(2.0 * spec.margin_y_mm * ppm + slot_h * static_cast<double>(spec.leads.size())));

  Sheet sheet;
  RgbImage& img = sheet.image;
  img = RgbImage(width, height, spec.paper_color);
  GroundTruth& gt = sheet.truth;
  gt.px_per_mm = ppm;
  gt.mv_per_mm = spec.mv_per_mm;
  gt.ms_per_mm = spec.ms_per_mm;
  gt.stroke_width_px = spec.stroke_width_px;
  gt.trace_mask = BinaryImage(width, height, 0);
  gt.glyph_mask = BinaryImage(width, height, 0);
  BinaryImage grid(width, height, 0);

  for (int axis = 0; axis < 2; ++axis) {
    const std::size_t extent = axis == 0 ? height : width;
    for (long k = 0;; ++k) {
      const auto pos = static_cast<std::size_t>(std::lround(static_cast<double>(k) * ppm));
      if (pos >= extent) break;
      const Rgb color = k % spec.grid_heavy_every == 0 ? spec.grid_heavy_color : spec.grid_color;
      if (axis == 0) {
        for (std::size_t c = 0; c < width; ++c) {
          if (!grid(pos, c) || color == spec.grid_heavy_color) img(pos, c) = color;
          grid(pos, c) = 1;
        }
      } else {
        for (std::size_t r = 0; r < height; ++r) {
          if (!grid(r, pos) || color == spec.grid_heavy_color) img(r, pos) = color;
          grid(r, pos) = 1;
        }
      }
    }
  }

  const double radius = 0.5 * spec.stroke_width_px;
  const double r2 = radius * radius;
  const double top0 = spec.margin_y_mm * ppm;
  for (std::size_t li = 0; li < spec.leads.size(); ++li) {
    const LeadSpec& lead = spec.leads[li];
    LeadTruth truth;
    truth.name = lead.name;
    const double slot_top = top0 + slot_h * static_cast<double>(li);
    const double slot_bottom = slot_top + slot_h;
    truth.slot = {static_cast<std::size_t>(std::ceil(slot_top)),
                  std::min(height - 1, static_cast<std::size_t>(std::ceil(slot_bottom)) - 1)};
    truth.baseline_row = std::round(slot_top + spec.baseline_fraction * slot_h);

    std::vector<double> xs(lead.samples_mv.size());
    std::vector<double> ys(lead.samples_mv.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = curve_x0 + static_cast<double>(i) * lead.ms_per_sample / spec.ms_per_mm * ppm;
      ys[i] = truth.baseline_row - lead.samples_mv[i] / spec.mv_per_mm * ppm;
      if (ys[i] - radius < slot_top || ys[i] + radius > slot_bottom - 1.0) {
        throw Error(ErrorCode::clipping, "lead '" + lead.name + "' leaves its " +
                                             std::to_string(spec.stripe_height_mm) + " mm stripe");
      }
    }
    truth.col_start = static_cast<std::size_t>(xs.front());
    const auto col_end = static_cast<std::size_t>(std::floor(xs.back()));
    std::size_t seg = 0;
    for (std::size_t c = truth.col_start; c <= col_end; ++c) {
      const double x = static_cast<double>(c);
      while (seg + 2 < xs.size() && xs[seg + 1] < x) ++seg;
      const double t = std::clamp((x - xs[seg]) / (xs[seg + 1] - xs[seg]), 0.0, 1.0);
      truth.centerline.push_back(ys[seg] + t * (ys[seg + 1] - ys[seg]));
    }

    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const long c_lo = static_cast<long>(std::floor(std::min(xs[i], xs[i + 1]) - radius));
      const long c_hi = static_cast<long>(std::ceil(std::max(xs[i], xs[i + 1]) + radius));
      const long r_lo = static_cast<long>(std::floor(std::min(ys[i], ys[i + 1]) - radius));
      const long r_hi = static_cast<long>(std::ceil(std::max(ys[i], ys[i + 1]) + radius));
      for (long r = std::max(0L, r_lo); r <= std::min<long>(static_cast<long>(height) - 1, r_hi); ++r) {
        for (long c = std::max(0L, c_lo); c <= std::min<long>(static_cast<long>(width) - 1, c_hi); ++c) {
          if (synth_detail::segment_distance_sq(static_cast<double>(c), static_cast<double>(r), xs[i], ys[i],
                                                xs[i + 1], ys[i + 1]) <= r2) {
            gt.trace_mask(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1;
          }
        }
      }
    }

    if (spec.label_glyphs && !lead.name.empty()) {
      double top = 0.0;
      double left = 0.0;
      if (spec.glyph_layout == GlyphLayout::left) {
        left = std::round(spec.margin_x_mm * ppm);
        top = std::round(truth.baseline_row - 0.5 * glyph.text_height());
      } else {
        left = curve_x0 + std::round(0.5 * ppm);
        const double right = left + glyph.text_width(lead.name.size());
        double lowest = truth.baseline_row;
        for (std::size_t c = static_cast<std::size_t>(left); c <= static_cast<std::size_t>(right); ++c) {
          if (auto row = truth.row_at(c)) lowest = std::max(lowest, *row + radius);
        }
        top = std::round(std::max(truth.baseline_row + spec.glyph_offset_mm * ppm, lowest + 1.5 * ppm));
      }
      BoundingBox box{std::numeric_limits<std::size_t>::max(), std::numeric_limits<std::size_t>::max(), 0, 0};
      for (auto [r, c] : synth_detail::glyph_cells(lead.name, top, left, glyph)) {
        if (r < static_cast<long>(truth.slot.row_start) || r > static_cast<long>(truth.slot.row_end) || c < 0 ||
            c >= static_cast<long>(width)) {
          throw Error(ErrorCode::overlapping_layout, "glyphs of lead '" + lead.name + "' leave the stripe");
        }
        const auto rr = static_cast<std::size_t>(r);
        const auto cc = static_cast<std::size_t>(c);
        if (gt.trace_mask(rr, cc)) {
          throw Error(ErrorCode::overlapping_layout, "glyphs of lead '" + lead.name + "' overlap the trace");
        }
        if (!gt.glyph_mask(rr, cc)) ++truth.glyph_pixels;
        gt.glyph_mask(rr, cc) = 1;
        box.min_row = std::min(box.min_row, rr);
        box.min_col = std::min(box.min_col, cc);
        box.max_row = std::max(box.max_row, rr);
        box.max_col = std::max(box.max_col, cc);
      }
      if (truth.glyph_pixels > 0) truth.glyph_box = box;
    }
    gt.leads.push_back(std::move(truth));
  }

  gt.grid_only_mask = BinaryImage(width, height, 0);
  auto ink_t = gt.trace_mask.data();
  auto ink_g = gt.glyph_mask.data();
  auto grid_px = grid.data();
  auto only = gt.grid_only_mask.data();
  auto px = img.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const bool ink = ink_t[i] || ink_g[i];
    if (ink) px[i] = spec.ink_color;
    only[i] = grid_px[i] && !ink ? 1 : 0;
  }
  return sheet;
}

// --- distortions ------------------------------------------------------------

/// Separable Gaussian blur, kernel truncated at 3 sigma, replicated borders.
inline RgbImage blur(const RgbImage& img, double sigma_px) {
  if (sigma_px < 0.0) throw Error(ErrorCode::invalid_argument, "blur sigma must be >= 0");
  if (sigma_px == 0.0) return img;
  const int half = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double total = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double k = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
    kernel[static_cast<std::size_t>(i + half)] = k;
    total += k;
  }
  for (auto& k : kernel) k /= total;

  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  std::vector<std::array<double, 3>> tmp(img.size());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      std::array<double, 3> acc{0, 0, 0};
      for (int i = -half; i <= half; ++i) {
        const long cc = std::clamp(c + i, 0L, w - 1);
        const Rgb p = img(static_cast<std::size_t>(r), static_cast<std::size_t>(cc));
        const double k = kernel[static_cast<std::size_t>(i + half)];
        acc[0] += k * p.r;
        acc[1] += k * p.g;
        acc[2] += k * p.b;
      }
      tmp[static_cast<std::size_t>(r * w + c)] = acc;
    }
  }
  RgbImage out(img.width(), img.height());
  auto to_u8 = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      std::array<double, 3> acc{0, 0, 0};
      for (int i = -half; i <= half; ++i) {
        const long rr = std::clamp(r + i, 0L, h - 1);
        const auto& p = tmp[static_cast<std::size_t>(rr * w + c)];
        const double k = kernel[static_cast<std::size_t>(i + half)];
        acc[0] += k * p[0];
        acc[1] += k * p[1];
        acc[2] += k * p[2];
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = {to_u8(acc[0]), to_u8(acc[1]), to_u8(acc[2])};
    }
  }
  return out;
}

/// Pulls every channel toward the pixel's luma by `factor` (0 = identity,
/// 1 = gray).
inline RgbImage desaturate(const RgbImage& img, double factor) {
  if (!(factor >= 0.0 && factor <= 1.0)) throw Error(ErrorCode::invalid_argument, "desaturation factor must lie in [0, 1]");
  RgbImage out = img;
  for (auto& p : out.data()) {
    const double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    auto pull = [&](std::uint8_t c) {
      return static_cast<std::uint8_t>(std::clamp(std::lround(c + factor * (y - c)), 0L, 255L));
    };
    p = {pull(p.r), pull(p.g), pull(p.b)};
  }
  return out;
}

/// Rotation about the image center with bilinear sampling and `fill` outside
/// the source frame. A source offset (dx, dy) from the center lands at
/// (cos*dx + sin*dy, -sin*dx + cos*dy).
inline RgbImage rotate(const RgbImage& img, double degrees, Rgb fill = Rgb{252, 250, 248}) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = 0.5 * static_cast<double>(img.width() - 1);
  const double cy = 0.5 * static_cast<double>(img.height() - 1);
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  RgbImage out(img.width(), img.height(), fill);
  auto sample = [&](long r, long c, int ch) -> double {
    if (r < 0 || c < 0 || r >= h || c >= w) {
      return ch == 0 ? fill.r : ch == 1 ? fill.g : fill.b;
    }
    const Rgb p = img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    return ch == 0 ? p.r : ch == 1 ? p.g : p.b;
  };
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      // Inverse map: destination (x, y) comes from the source rotated back.
      const double dx = static_cast<double>(c) - cx;
      const double dy = static_cast<double>(r) - cy;
      const double sx = cs * dx - sn * dy + cx;
      const double sy = sn * dx + cs * dy + cy;
      if (sx < -1.0 || sy < -1.0 || sx > static_cast<double>(w) || sy > static_cast<double>(h)) continue;
      const long x0 = static_cast<long>(std::floor(sx));
      const long y0 = static_cast<long>(std::floor(sy));
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      std::array<std::uint8_t, 3> v{};
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1 - fx) * sample(y0, x0, ch) + fx * sample(y0, x0 + 1, ch);
        const double bot = (1 - fx) * sample(y0 + 1, x0, ch) + fx * sample(y0 + 1, x0 + 1, ch);
        v[static_cast<std::size_t>(ch)] =
            static_cast<std::uint8_t>(std::clamp(std::lround((1 - fy) * top + fy * bot), 0L, 255L));
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = {v[0], v[1], v[2]};
    }
  }
  return out;
}

}  // namespace ecgd

#endif  // ECGD_SYNTH_HPP
