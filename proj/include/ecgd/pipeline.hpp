#ifndef ECGD_PIPELINE_HPP
#define ECGD_PIPELINE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ecgd/binarize.hpp"
#include "ecgd/calibrate.hpp"
#include "ecgd/charclean.hpp"
#include "ecgd/gridmask.hpp"
#include "ecgd/morphology.hpp"
#include "ecgd/raster.hpp"
#include "ecgd/segment.hpp"
#include "ecgd/trace.hpp"

namespace ecgd {

/// Tunables of one digitization run. Physical constants default to
/// 0.1 mV/mm and 25 mm/s paper.
struct PipelineConfig {
  double mv_per_mm = kDefaultMvPerMm;
  double ms_per_mm = kDefaultMsPerMm;
  std::optional<double> px_per_mm_override;
  double otsu_scale = kDefaultOtsuScale;
  bool keep_masked_ink = true;  // masked pixels darker than ink_level() survive whiteout
  CharFilterConfig chars;
  double curve_close_radius_mm = kCurveCloseRadiusMm;
  double gap_window_mm = kGapWindowMm;
  SegmentConfig regions;

  void validate() const {
    Calibration{px_per_mm_override.value_or(1.0), mv_per_mm, ms_per_mm}.validate();
    if (!(otsu_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "otsu scale must be positive");
    if (!(curve_close_radius_mm > 0.0) || !(gap_window_mm > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "close radius and gap window must be positive");
    }
    if (!(regions.left_fraction > 0.0 && regions.left_fraction < regions.middle_end_fraction &&
          regions.middle_end_fraction <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "region fractions must satisfy 0 < left < middle <= 1");
    }
    if (!(regions.min_band_coverage >= 0.0 && regions.min_band_coverage <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "band coverage fraction must lie in [0, 1]");
    }
    chars.validate();
  }
};

/// Debug raster names in processing order. Page-level stages are emitted once;
/// per-lead stages once per lead with the lead name appended.
inline constexpr std::array<std::string_view, 7> kPageStages = {
    "input", "color_index", "relu", "grid_mask", "grayscale", "whiteout", "binarized"};
inline constexpr std::array<std::string_view, 5> kLeadStages = {"stripe", "roi", "charclean", "clean",
                                                                "thin"};

using DebugRaster = std::variant<const RgbImage*, const GrayImage*, const BinaryImage*>;
using DebugSink = std::function<void(const std::string& name, DebugRaster raster)>;

struct LeadResult {
  std::size_t index = 0;
  std::string name;
  RowRange stripe;
  ColumnRoi roi;           // page columns
  ColumnRoi trace_bounds;  // page columns covered by the signal
  std::size_t missing_columns = 0;
  ColumnTrace trace;       // gap-filled
  Signal signal;
};

struct DigitizeResult {
  std::size_t width = 0;
  std::size_t height = 0;
  double px_per_mm = 0.0;
  std::string px_per_mm_source;  // "estimated" or "override"
  std::optional<GridEstimate> grid;
  Calibration calibration;
  std::vector<LeadResult> leads;
  std::vector<std::string> warnings;
};

inline std::string lead_name(std::size_t index, std::size_t count) {
  static constexpr std::array<std::string_view, 6> kSixLeads = {"I", "II", "III", "aVR", "aVL", "aVF"};
  if (count == kSixLeads.size()) return std::string(kSixLeads[index]);
  return "lead_" + std::to_string(index);
}

namespace pipeline_detail {

template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.code(), e.what());
  }
}

inline GrayImage index_preview(const IndexImage& idx) {
  GrayImage out(idx.width(), idx.height());
  auto src = idx.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround((src[i] + 1.0) * 127.5), 0L, 255L));
  }
  return out;
}

inline BinaryImage render_trace(const ColumnTrace& tr, std::size_t height) {
  BinaryImage out(tr.width(), height, 0);
  for (std::size_t c = 0; c < tr.width(); ++c) {
    if (!tr.rows[c]) continue;
    const auto r = static_cast<std::size_t>(std::clamp(std::lround(*tr.rows[c]), 0L, static_cast<long>(height) - 1));
    out(r, c) = 1;
  }
  return out;
}

}  // namespace pipeline_detail

/// Page-level outcome: the calibrated pitch and the binarized lead stripes.
struct PageAnalysis {
  double px_per_mm = 0.0;
  std::string px_per_mm_source;
  std::optional<GridEstimate> grid;
  std::vector<std::string> warnings;
  std::vector<Stripe> stripes;
};

/// Color index, rectification, grid mask, pitch, whiteout, binarization and
/// the stripe split.
inline PageAnalysis analyze_page(const RgbImage& img, const PipelineConfig& cfg, const DebugSink& debug = {}) {
  using pipeline_detail::stage;
  cfg.validate();
  PageAnalysis page;
  auto dump = [&](const std::string& name, DebugRaster r) {
    if (debug) debug(name, r);
  };
  dump("input", &img);

  const IndexImage idx = stage("color_index", [&] { return color_index(img); });
  if (debug) {
    const GrayImage preview = pipeline_detail::index_preview(idx);
    dump("color_index", &preview);
  }
  const IndexImage rect = stage("relu", [&] { return relu_rectify(idx); });
  if (debug) {
    const GrayImage preview = pipeline_detail::index_preview(rect);
    dump("relu", &preview);
  }
  const BinaryImage mask = stage("grid_mask", [&] { return grid_mask(rect, cfg.otsu_scale); });
  dump("grid_mask", &mask);

  if (cfg.px_per_mm_override) {
    page.px_per_mm = *cfg.px_per_mm_override;
    page.px_per_mm_source = "override";
  } else {
    page.grid = stage("estimate_pitch", [&] { return estimate_pitch(mask); });
    page.px_per_mm = page.grid->px_per_mm;
    page.px_per_mm_source = "estimated";
    if (page.px_per_mm < 8.0 || page.px_per_mm > 40.0) {
      page.warnings.push_back("implausible grid pitch " + std::to_string(page.px_per_mm) +
                              " px/mm; consider --px-per-mm");
    }
  }

  const GrayImage gray = stage("grayscale", [&] { return to_grayscale(img); });
  dump("grayscale", &gray);
  const GrayImage clean_gray = stage("whiteout", [&] {
    return whiteout(gray, mask, cfg.keep_masked_ink ? ink_level(gray, mask) : 0);
  });
  dump("whiteout", &clean_gray);
  const BinaryImage binary = stage("binarize_trace", [&] { return binarize_trace(clean_gray); });
  dump("binarized", &binary);

  const auto ranges = stage("find_stripes", [&] {
    return find_curve_stripes(binary, page.px_per_mm, cfg.regions.prominence_fraction,
                              cfg.regions.min_band_coverage);
  });
  page.stripes = make_stripes(binary, ranges);
  return page;
}

/**
 * Runs the full optical pipeline on one scanned sheet.
 *
 * After the page stages, each stripe goes through the edge-count ROI, crop,
 * character removal, curve cleaning, tight bounds, topmost thinning, gap
 * filling and calibration. Failures surface as StageError naming the stage.
 */
inline DigitizeResult digitize(const RgbImage& img, const PipelineConfig& cfg, const DebugSink& debug = {}) {
  using pipeline_detail::stage;
  PageAnalysis page = analyze_page(img, cfg, debug);
  DigitizeResult res;
  res.width = img.width();
  res.height = img.height();
  res.px_per_mm = page.px_per_mm;
  res.px_per_mm_source = page.px_per_mm_source;
  res.grid = page.grid;
  res.warnings = std::move(page.warnings);
  res.calibration = {res.px_per_mm, cfg.mv_per_mm, cfg.ms_per_mm};
  const double pitch = res.px_per_mm;
  auto dump = [&](const std::string& name, DebugRaster r) {
    if (debug) debug(name, r);
  };

  for (const Stripe& stripe : page.stripes) {
    LeadResult lead;
    lead.index = stripe.lead_index;
    lead.name = lead_name(stripe.lead_index, page.stripes.size());
    lead.stripe = {stripe.row_start, stripe.row_end};
    const std::string tag = "_" + lead.name;
    auto lead_stage = [&](const std::string& name, auto&& fn) { return stage(name + "[" + lead.name + "]", fn); };
    dump("stripe" + tag, &stripe.image);

    lead.roi = lead_stage("find_roi_columns",
                          [&] { return find_roi_columns(edge_projection(stripe.image), pitch, cfg.regions); });
    const BinaryImage roi = lead_stage("crop_roi", [&] { return crop_roi(stripe, lead.roi); });
    dump("roi" + tag, &roi);
    const BinaryImage no_chars = lead_stage("remove_characters", [&] { return remove_characters(roi, pitch, cfg.chars); });
    dump("charclean" + tag, &no_chars);
    const BinaryImage curve = lead_stage("clean_curve", [&] { return clean_curve(no_chars, pitch, cfg.curve_close_radius_mm); });
    dump("clean" + tag, &curve);
    const ColumnRoi bounds = lead_stage("tight_bounds", [&] { return tight_bounds(curve); });
    lead.trace_bounds = {lead.roi.col_start + bounds.col_start, lead.roi.col_start + bounds.col_end};
    ColumnTrace thin = lead_stage("thin_topmost", [&] {
      return thin_topmost(crop(curve, 0, curve.height() - 1, bounds.col_start, bounds.col_end));
    });
    thin.col_offset = lead.trace_bounds.col_start;
    thin.row_offset = stripe.row_start;
    if (debug) {
      const BinaryImage thin_img = pipeline_detail::render_trace(thin, curve.height());
      dump("thin" + tag, &thin_img);
    }
    lead.missing_columns = static_cast<std::size_t>(
        std::count_if(thin.rows.begin(), thin.rows.end(), [](const auto& r) { return !r.has_value(); }));
    const auto window = static_cast<std::size_t>(std::max(1L, std::lround(cfg.gap_window_mm * pitch)));
    lead.trace = lead_stage("fill_gaps", [&] { return fill_gaps(thin, window); });
    lead.signal = lead_stage("to_signal", [&] { return to_signal(lead.trace, res.calibration, lead.index); });
    if (lead.missing_columns * 5 > thin.width()) {
      res.warnings.push_back("lead " + lead.name + ": " + std::to_string(lead.missing_columns) + " of " +
                             std::to_string(thin.width()) + " columns were gap-filled");
    }
    res.leads.push_back(std::move(lead));
  }
  return res;
}

/// Blob table of one stripe as seen by the character filter: the ROI crop
/// closed with the character radius, then labeled. A stripe without ink in
/// its middle band yields no blobs.
inline std::vector<Blob> stripe_blobs(const RgbImage& img, const PipelineConfig& cfg, std::size_t stripe_index) {
  using pipeline_detail::stage;
  const PageAnalysis page = analyze_page(img, cfg);
  if (stripe_index >= page.stripes.size()) {
    throw Error(ErrorCode::out_of_range, "stripe " + std::to_string(stripe_index) + " requested but the sheet has " +
                                             std::to_string(page.stripes.size()));
  }
  const Stripe& stripe = page.stripes[stripe_index];
  ColumnRoi roi;
  try {
    roi = find_roi_columns(edge_projection(stripe.image), page.px_per_mm, cfg.regions);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::empty_roi) return {};
    throw StageError("find_roi_columns", e.code(), e.what());
  }
  const BinaryImage cropped = crop_roi(stripe, roi);
  const Disk se{static_cast<int>(std::lround(cfg.chars.close_radius_mm * page.px_per_mm))};
  return stage("label", [&] { return label(close(cropped, se)).blobs; });
}

}  // namespace ecgd

#endif  // ECGD_PIPELINE_HPP
