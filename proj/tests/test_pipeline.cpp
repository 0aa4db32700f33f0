#include <gtest/gtest.h>

#include "ecgd/pipeline.hpp"
#include "support/sheets.hpp"

using namespace ecgd;
using ecgd::testing::reference_sheet;

namespace {

// Small sheets keep the suite quick; the acceptance binary covers full pages.
const Sheet& three_lead_sheet() {
  static const Sheet sheet = render_sheet(reference_sheet(3, 12.0, 2500.0));
  return sheet;
}

// Topmost rendered trace pixel per page column.
std::optional<std::size_t> truth_top(const GroundTruth& gt, const LeadTruth& lead, std::size_t col) {
  for (std::size_t r = lead.slot.row_start; r <= lead.slot.row_end; ++r)
    if (gt.trace_mask(r, col)) return r;
  return std::nullopt;
}

}  // namespace

TEST(Digitize, GrayscalePageHasNoGrid) {
  RgbImage img(200, 150, Rgb{250, 250, 250});
  for (std::size_t c = 0; c < 200; ++c) img(75, c) = {10, 10, 10};
  try {
    digitize(img, {});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "grid_mask");
    EXPECT_EQ(e.code(), ErrorCode::no_grid);
    EXPECT_NE(std::string(e.what()).find("no grid detected"), std::string::npos);
  }
}

TEST(Digitize, InvalidConfigRejected) {
  PipelineConfig cfg;
  cfg.otsu_scale = 0;
  EXPECT_THROW(digitize(three_lead_sheet().image, cfg), Error);
}

TEST(Digitize, OverrideSkipsPitchEstimate) {
  PipelineConfig cfg;
  cfg.px_per_mm_override = 12.0;
  const DigitizeResult res = digitize(three_lead_sheet().image, cfg);
  EXPECT_EQ(res.px_per_mm_source, "override");
  EXPECT_FALSE(res.grid.has_value());
  EXPECT_EQ(res.px_per_mm, 12.0);
  EXPECT_EQ(res.leads.size(), 3u);
}

TEST(Digitize, TraceFollowsRenderedTop) {
  const Sheet& sheet = three_lead_sheet();
  const DigitizeResult res = digitize(sheet.image, {});
  EXPECT_EQ(res.px_per_mm_source, "estimated");
  EXPECT_NEAR(res.px_per_mm, 12.0, 0.12);
  ASSERT_EQ(res.leads.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const LeadResult& lead = res.leads[i];
    EXPECT_EQ(lead.name, "lead_" + std::to_string(i));
    EXPECT_EQ(lead.signal.t_ms.size(), lead.trace.width());
    std::size_t close = 0, total = 0;
    for (std::size_t k = 0; k < lead.trace.width(); ++k) {
      const auto want = truth_top(sheet.truth, sheet.truth.leads[i], lead.trace.col_offset + k);
      if (!want) continue;
      ++total;
      const double got = *lead.trace.rows[k] + static_cast<double>(lead.trace.row_offset);
      close += std::abs(got - static_cast<double>(*want)) <= 2.0;
    }
    ASSERT_GT(total, 700u);
    EXPECT_GE(static_cast<double>(close), 0.99 * static_cast<double>(total)) << lead.name;
  }
}

TEST(Digitize, SixLeadsAreNamed) {
  const Sheet sheet = render_sheet(reference_sheet(6, 12.0, 1500.0));
  const DigitizeResult res = digitize(sheet.image, {});
  ASSERT_EQ(res.leads.size(), 6u);
  const char* names[] = {"I", "II", "III", "aVR", "aVL", "aVF"};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(res.leads[i].name, names[i]);
}

TEST(Digitize, DebugStagesInOrder) {
  std::vector<std::string> names;
  BinaryImage binarized;
  const DebugSink sink = [&](const std::string& name, DebugRaster r) {
    names.push_back(name);
    if (name == "binarized") binarized = *std::get<const BinaryImage*>(r);
  };
  const Sheet& sheet = three_lead_sheet();
  const DigitizeResult res = digitize(sheet.image, {}, sink);
  std::vector<std::string> want(kPageStages.begin(), kPageStages.end());
  for (const auto& lead : res.leads)
    for (auto s : kLeadStages) want.push_back(std::string(s) + "_" + lead.name);
  EXPECT_EQ(names, want);

  // The binarized page keeps the trace and little else.
  ASSERT_EQ(binarized.width(), sheet.image.width());
  BinaryImage ink = sheet.truth.trace_mask;
  for (std::size_t k = 0; k < ink.size(); ++k) ink.data()[k] |= sheet.truth.glyph_mask.data()[k];
  const BinaryImage near_ink = dilate(ink, Disk{1});
  std::size_t hit = 0, stray = 0;
  for (std::size_t k = 0; k < ink.size(); ++k) {
    hit += sheet.truth.trace_mask.data()[k] && binarized.data()[k];
    stray += binarized.data()[k] && !near_ink.data()[k];
  }
  EXPECT_GE(static_cast<double>(hit), 0.95 * static_cast<double>(count_active(sheet.truth.trace_mask)));
  EXPECT_EQ(stray, 0u);
}

TEST(StripeBlobs, LargestFirstAndBounds) {
  const Sheet& sheet = three_lead_sheet();
  const auto blobs = stripe_blobs(sheet.image, {}, 1);
  ASSERT_FALSE(blobs.empty());
  for (std::size_t k = 1; k < blobs.size(); ++k) EXPECT_GE(blobs[k - 1].area, blobs[k].area);
  EXPECT_GT(blobs[0].width(), 500u);  // the curve
  try {
    stripe_blobs(sheet.image, {}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_range);
  }
}

TEST(LeadName, SixOrIndexed) {
  EXPECT_EQ(lead_name(3, 6), "aVR");
  EXPECT_EQ(lead_name(3, 4), "lead_3");
}
