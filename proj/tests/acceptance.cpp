// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "ecgd/image_io.hpp"
#include "ecgd/pipeline.hpp"
#include "ecgd/serialize.hpp"
#include "support/oracles.hpp"
#include "support/sheets.hpp"

using namespace ecgd;
using ecgd::testing::compare_lead;
using ecgd::testing::reference_sheet;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kOtsuSeconds = 5.0;
constexpr double kMorphSeconds = 10.0;
constexpr double kGridSurvivorMax = 0.005;
constexpr double kTraceKeptMin = 0.95;
constexpr double kPitchRelTol = 0.02;
constexpr double kRoiMarginExcludedMin = 0.95;
constexpr double kGlyphRemovedMin = 0.95;
constexpr double kRmseMax = 0.025;
constexpr double kStressRmseMax = 0.05;
constexpr double kPearsonMin = 0.99;
constexpr double kRoundTripSeconds = 60.0;
constexpr double kExactTol = 1e-9;

constexpr double kDefaultPpm = 23.622;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

// Rendered sheets are shared between criteria.
const Sheet& sheet(std::size_t leads, double ppm, GlyphLayout layout = GlyphLayout::below) {
  static std::map<std::tuple<std::size_t, double, int>, Sheet> cache;
  const auto key = std::make_tuple(leads, ppm, static_cast<int>(layout));
  auto it = cache.find(key);
  if (it == cache.end()) {
    SheetSpec spec = reference_sheet(leads, ppm);
    spec.glyph_layout = layout;
    it = cache.emplace(key, render_sheet(spec)).first;
  }
  return it->second;
}

// Debug rasters of one pipeline run, keyed by stage name.
struct Captured {
  std::map<std::string, BinaryImage> binary;
};

DebugSink capture(Captured& into) {
  return [&into](const std::string& name, DebugRaster r) {
    if (auto* b = std::get_if<const BinaryImage*>(&r)) into.binary[name] = **b;
  };
}

// --- 1 ----------------------------------------------------------------------

Outcome otsu_oracles() {
  const auto t0 = Clock::now();
  std::mt19937 rng(1001);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t bins = 2 + rng() % 255;
    std::vector<std::uint64_t> h(bins, 0);
    while (std::count_if(h.begin(), h.end(), [](auto v) { return v > 0; }) < 2) {
      const double density = std::uniform_real_distribution<double>(0.02, 1.0)(rng);
      for (auto& v : h)
        if (std::bernoulli_distribution(density)(rng)) v = 1 + rng() % 80;
    }
    std::vector<double> values;
    std::vector<std::uint8_t> gray;
    for (std::size_t b = 0; b < bins; ++b)
      for (std::uint64_t i = 0; i < h[b]; ++i) {
        values.push_back((static_cast<double>(b) + 0.5) / static_cast<double>(bins));
        gray.push_back(static_cast<std::uint8_t>(b));
      }
    const IndexImage idx(values.size(), 1, values);
    if (otsu_threshold_real(idx, bins) != oracle::otsu_split(h) / static_cast<double>(bins)) ++mismatches;
    std::vector<std::uint64_t> h256 = h;
    h256.resize(256, 0);
    const GrayImage g(gray.size(), 1, gray);
    if (otsu_threshold_u8(g) != static_cast<int>(std::floor(oracle::otsu_split(h256)))) ++mismatches;
  }
  for (int trial = 0; trial < 50; ++trial) {
    GrayImage img(16, 16);
    const int lo = static_cast<int>(rng() % 200);
    const int span = 2 + static_cast<int>(rng() % 54);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(lo + static_cast<int>(rng() % static_cast<unsigned>(span)));
    const auto h = gray_histogram(img);
    if (std::count_if(h.begin(), h.end(), [](auto v) { return v > 0; }) < 2) continue;
    const double split = oracle::otsu_split(h);
    if (otsu_threshold_u8(img) != static_cast<int>(std::floor(split))) ++mismatches;
    IndexImage idx(16, 16);
    for (std::size_t i = 0; i < idx.size(); ++i) idx.data()[i] = (img.data()[i] + 0.5) / 256.0;
    if (otsu_threshold_real(idx) != split / 256.0) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kOtsuSeconds,
          std::to_string(mismatches) + " mismatches over 500 comparisons, " + fmt(secs, 3) + " s"};
}

// --- 2 ----------------------------------------------------------------------

Outcome morphology_oracles() {
  const auto t0 = Clock::now();
  std::mt19937 rng(2002);
  std::size_t close_bad = 0, literal_bad = 0, label_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    BinaryImage img(1 + rng() % 32, 1 + rng() % 32);
    const unsigned density = 2 + rng() % 5;
    for (auto& v : img.data()) v = rng() % density == 0;
    const int r = 1 + static_cast<int>(rng() % 4);
    const BinaryImage got = close(img, Disk{r});
    if (got != oracle::close(img, r)) ++close_bad;
    // Literal erode(dilate()) with a false border agrees away from the edges.
    const BinaryImage literal = oracle::erode(oracle::dilate(img, r), r);
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 0; x < img.width(); ++x) {
        const auto ur = static_cast<std::size_t>(r);
        if (y < ur || x < ur || y + ur >= img.height() || x + ur >= img.width()) continue;
        if (got(y, x) != literal(y, x)) ++literal_bad;
      }
    const Labeling l = label(img);
    if (!oracle::same_partition(oracle::flood_labels(img),
                                std::vector<std::int32_t>(l.labels.data().begin(), l.labels.data().end())))
      ++label_bad;
  }
  const double secs = seconds_since(t0);
  return {close_bad == 0 && literal_bad == 0 && label_bad == 0 && secs < kMorphSeconds,
          "close vs padded definition: " + std::to_string(close_bad) + " bad; vs erode(dilate) interior: " +
              std::to_string(literal_bad) + " bad pixels; label vs flood fill: " + std::to_string(label_bad) +
              " bad; " + fmt(secs, 3) + " s"};
}

// --- 3 ----------------------------------------------------------------------

Outcome grid_suppression() {
  const Sheet& s = sheet(6, kDefaultPpm);
  Captured cap;
  analyze_page(s.image, {}, capture(cap));
  const BinaryImage& bin = cap.binary.at("binarized");
  std::size_t grid_on = 0, trace_on = 0;
  const std::size_t grid_total = count_active(s.truth.grid_only_mask);
  const std::size_t trace_total = count_active(s.truth.trace_mask);
  for (std::size_t i = 0; i < bin.size(); ++i) {
    grid_on += bin.data()[i] && s.truth.grid_only_mask.data()[i];
    trace_on += bin.data()[i] && s.truth.trace_mask.data()[i];
  }
  const double g = static_cast<double>(grid_on) / static_cast<double>(grid_total);
  const double t = static_cast<double>(trace_on) / static_cast<double>(trace_total);
  return {g <= kGridSurvivorMax && t >= kTraceKeptMin,
          "grid-only active " + fmt(100 * g, 3) + "%, trace active " + fmt(100 * t, 2) + "%"};
}

// --- 4 ----------------------------------------------------------------------

Outcome pitch_recovery() {
  bool ok = true;
  std::string detail;
  for (double ppm : {12.0, kDefaultPpm, 30.0}) {
    const Sheet& s = sheet(3, ppm);
    try {
      const GridEstimate g = estimate_pitch(grid_mask(relu_rectify(color_index(s.image))));
      const double rel = std::abs(g.px_per_mm - ppm) / ppm;
      ok = ok && rel <= kPitchRelTol;
      detail += fmt(ppm, 3) + " -> " + fmt(g.px_per_mm, 3) + " (" + fmt(100 * rel, 2) + "%) ";
    } catch (const Error& e) {
      ok = false;
      detail += fmt(ppm, 3) + " -> error " + e.what() + " ";
    }
  }
  return {ok, detail};
}

// --- 5 ----------------------------------------------------------------------

Outcome segmentation() {
  bool ok = true;
  std::string detail;
  for (std::size_t leads : {3u, 6u}) {
    for (GlyphLayout layout : {GlyphLayout::below, GlyphLayout::left}) {
      const Sheet& s = sheet(leads, kDefaultPpm, layout);
      const PageAnalysis page = analyze_page(s.image, {});
      const char* tag = layout == GlyphLayout::left ? "left" : "below";
      detail += std::to_string(leads) + "/" + tag + ": " + std::to_string(page.stripes.size()) + " stripes";
      if (page.stripes.size() != leads) {
        ok = false;
        detail += "; ";
        continue;
      }
      std::size_t outside = 0;
      for (std::size_t i = 0; i < leads; ++i) {
        const auto& cl = s.truth.leads[i].centerline;
        const auto [lo, hi] = std::minmax_element(cl.begin(), cl.end());
        if (*lo < static_cast<double>(page.stripes[i].row_start) || *hi > static_cast<double>(page.stripes[i].row_end))
          ++outside;
      }
      ok = ok && outside == 0;
      detail += ", " + std::to_string(outside) + " centerlines outside";
      if (layout == GlyphLayout::left) {
        std::size_t margin = 0, excluded = 0;
        for (std::size_t i = 0; i < leads; ++i) {
          const LeadTruth& lt = s.truth.leads[i];
          if (!lt.glyph_box) continue;
          const ColumnRoi roi = find_roi_columns(edge_projection(page.stripes[i].image), page.px_per_mm);
          for (std::size_t c = lt.glyph_box->min_col; c <= lt.glyph_box->max_col; ++c) {
            ++margin;
            excluded += c < roi.col_start || c > roi.col_end;
          }
        }
        const double frac = margin ? static_cast<double>(excluded) / static_cast<double>(margin) : 0.0;
        ok = ok && frac >= kRoiMarginExcludedMin;
        detail += ", glyph margin excluded " + fmt(100 * frac, 1) + "%";
      }
      detail += "; ";
    }
  }
  return {ok, detail};
}

// --- 6 ----------------------------------------------------------------------

Outcome character_removal() {
  bool ok = true;
  std::string detail;
  for (GlyphLayout layout : {GlyphLayout::below, GlyphLayout::left}) {
    const Sheet& s = sheet(6, kDefaultPpm, layout);
    Captured cap;
    const DigitizeResult res = digitize(s.image, {}, capture(cap));
    if (res.leads.size() != s.truth.leads.size()) {
      ok = false;
      detail += "lead count mismatch; ";
      continue;
    }
    std::size_t glyph_total = 0, glyph_left = 0, lost = 0;
    for (std::size_t i = 0; i < res.leads.size(); ++i) {
      const LeadResult& lead = res.leads[i];
      const LeadTruth& lt = s.truth.leads[i];
      const BinaryImage& kept = cap.binary.at("charclean_" + lead.name);
      auto page_active = [&](std::size_t r, std::size_t c) {
        if (r < lead.stripe.row_start || c < lead.roi.col_start || c > lead.roi.col_end) return false;
        return kept(r - lead.stripe.row_start, c - lead.roi.col_start) != 0;
      };
      if (lt.glyph_box) {
        for (std::size_t r = lt.glyph_box->min_row; r <= lt.glyph_box->max_row; ++r)
          for (std::size_t c = lt.glyph_box->min_col; c <= lt.glyph_box->max_col; ++c) {
            if (!s.truth.glyph_mask(r, c)) continue;
            ++glyph_total;
            glyph_left += r <= lead.stripe.row_end && page_active(r, c);
          }
      }
      for (std::size_t k = 0; k < lt.centerline.size(); ++k) {
        const std::size_t c = lt.col_start + k;
        bool any = false;
        for (std::size_t r = lead.stripe.row_start; r <= lead.stripe.row_end && !any; ++r) any = page_active(r, c);
        lost += !any;
      }
    }
    const double removed = 1.0 - static_cast<double>(glyph_left) / static_cast<double>(glyph_total);
    ok = ok && removed >= kGlyphRemovedMin && lost == 0;
    detail += std::string(layout == GlyphLayout::left ? "left" : "below") + ": glyph pixels removed " +
              fmt(100 * removed, 2) + "%, centerline columns lost " + std::to_string(lost) + "; ";
  }
  return {ok, detail};
}

// --- 7 / 8 ------------------------------------------------------------------

struct Scores {
  double worst_rmse = 0.0;
  double worst_r = 1.0;
  std::size_t leads = 0;
};

Scores score(const DigitizeResult& res, const GroundTruth& gt) {
  Scores sc;
  sc.leads = res.leads.size();
  if (res.leads.size() != gt.leads.size()) {
    sc.worst_rmse = INFINITY;
    sc.worst_r = 0.0;
    return sc;
  }
  for (std::size_t i = 0; i < res.leads.size(); ++i) {
    const auto rt = compare_lead(res.leads[i], gt.leads[i], gt.px_per_mm, gt.mv_per_mm);
    if (!rt) {
      sc.worst_rmse = INFINITY;
      sc.worst_r = 0.0;
      continue;
    }
    sc.worst_rmse = std::max(sc.worst_rmse, rt->rmse_mv);
    sc.worst_r = std::min(sc.worst_r, rt->pearson);
  }
  return sc;
}

Outcome round_trip() {
  const Sheet& s = sheet(6, kDefaultPpm);
  const auto t0 = Clock::now();
  const DigitizeResult res = digitize(s.image, {});
  const double secs = seconds_since(t0);
  const Scores sc = score(res, s.truth);
  return {sc.worst_rmse <= kRmseMax && sc.worst_r >= kPearsonMin && secs < kRoundTripSeconds,
          std::to_string(sc.leads) + " leads, worst RMSE " + fmt(sc.worst_rmse) + " mV, worst r " +
              fmt(sc.worst_r, 5) + ", " + fmt(secs, 2) + " s"};
}

Outcome stress() {
  const Sheet& s = sheet(6, kDefaultPpm);
  struct Case {
    const char* name;
    std::function<RgbImage(const RgbImage&)> distort;
  };
  const Case cases[] = {
      {"blur 1.0", [](const RgbImage& i) { return blur(i, 1.0); }},
      {"desaturate 0.25", [](const RgbImage& i) { return desaturate(i, 0.25); }},
      {"blur+desaturate", [](const RgbImage& i) { return desaturate(blur(i, 1.0), 0.25); }},
  };
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    try {
      const Scores sc = score(digitize(c.distort(s.image), {}), s.truth);
      const bool pass = sc.worst_rmse <= kStressRmseMax && sc.worst_r >= kPearsonMin;
      ok = ok && pass;
      detail += std::string(c.name) + ": RMSE " + fmt(sc.worst_rmse) + " r " + fmt(sc.worst_r, 4) +
                (pass ? "" : " (over limit)") + "; ";
    } catch (const Error& e) {
      ok = false;
      detail += std::string(c.name) + ": error " + e.what() + "; ";
    }
  }
  // A one-degree rotation is expected to break the pipeline.
  try {
    const Scores sc = score(digitize(rotate(s.image, 1.0), {}), s.truth);
    const bool failed = sc.worst_rmse > kStressRmseMax;
    ok = ok && failed;
    detail += "rotate 1.0: RMSE " + fmt(sc.worst_rmse) + (failed ? " (fails as expected)" : " (unexpectedly passes)");
  } catch (const Error& e) {
    detail += std::string("rotate 1.0: fails as expected with ") + e.what();
  }
  return {ok, detail};
}

// --- 9 ----------------------------------------------------------------------

Outcome determinism() {
#ifdef ECGD_CLI_PATH
  const fs::path dir = fs::temp_directory_path() / "ecgd_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path png = dir / "sheet.png";
  save_image(sheet(6, kDefaultPpm).image, png);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("ECGD_LOG=off '") + ECGD_CLI_PATH + "' digitize '" + png.string() +
                            "' --out '" + (dir / run).string() + "'";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, std::string("digitize run ") + run + " failed"};
  }
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "sheet")) {
    ++files;
    const fs::path other = dir / "b" / "sheet" / e.path().filename();
    if (!fs::exists(other) || read_text_file(e.path()) != read_text_file(other)) ++differ;
  }
  return {files == 7 && differ == 0, std::to_string(files) + " files compared, " + std::to_string(differ) + " differ"};
#else
  return {false, "command-line tool not built"};
#endif
}

// --- 10 ---------------------------------------------------------------------

Outcome unit_conversion() {
  ColumnTrace t;
  t.rows = {10.0, 20.0};
  const Signal s = to_signal(t, {10.0, 0.1, 40.0}, 0);
  const bool ok = s.v_mv.size() == 2 && std::abs(s.v_mv[0] - 0.05) <= kExactTol &&
                  std::abs(s.v_mv[1] + 0.05) <= kExactTol && std::abs(s.t_ms[0]) <= kExactTol &&
                  std::abs(s.t_ms[1] - 4.0) <= kExactTol;
  std::ostringstream d;
  d.precision(12);
  d << "v_mv [" << s.v_mv[0] << ", " << s.v_mv[1] << "], t_ms [" << s.t_ms[0] << ", " << s.t_ms[1] << "]";
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"otsu matches exhaustive search", otsu_oracles},
      {"morphology and labeling match naive oracles", morphology_oracles},
      {"grid suppression", grid_suppression},
      {"grid pitch recovery", pitch_recovery},
      {"stripe and ROI segmentation", segmentation},
      {"character removal", character_removal},
      {"end-to-end round trip", round_trip},
      {"distortion stress suite", stress},
      {"deterministic output", determinism},
      {"unit conversion example", unit_conversion},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("unexpected error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
