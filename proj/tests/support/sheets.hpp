#ifndef ECGD_TESTS_SUPPORT_SHEETS_HPP
#define ECGD_TESTS_SUPPORT_SHEETS_HPP

// Shared fixtures: reference signals, sheet builders and the ground-truth
// comparisons used by several test binaries.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ecgd/pipeline.hpp"
#include "ecgd/synth.hpp"

namespace ecgd::testing {

/// Band-limited lead: a few sinusoids up to 40 Hz plus Gaussian beats.
inline SignalRecipe reference_recipe(std::size_t lead, double duration_ms = 4000.0) {
  const double shift = 0.7 * static_cast<double>(lead);
  SignalRecipe r;
  r.duration_ms = duration_ms;
  r.ms_per_sample = 1.0;
  r.components = {
      {1.1, 0.12, shift},
      {2.7, 0.08, 1.3 + shift},
      {6.5, 0.04, 0.4 * shift},
      {15.0, 0.015, 2.0 - shift},
      {40.0, 0.004, shift},
  };
  r.qrs = QrsTrain{70.0 + 5.0 * static_cast<double>(lead), 0.8 + 0.05 * static_cast<double>(lead), 25.0,
                   250.0 + 40.0 * static_cast<double>(lead)};
  return r;
}

inline SheetSpec reference_sheet(std::size_t leads, double px_per_mm = 23.622, double duration_ms = 4000.0) {
  SheetSpec spec;
  spec.px_per_mm = px_per_mm;
  static const char* kSix[] = {"I", "II", "III", "aVR", "aVL", "aVF"};
  for (std::size_t i = 0; i < leads; ++i) {
    spec.leads.push_back({leads == 6 ? kSix[i] : "L" + std::to_string(i), generate_signal(reference_recipe(i, duration_ms)),
                          1.0});
  }
  return spec;
}

struct RoundTrip {
  double rmse_mv = 0.0;
  double pearson = 0.0;
  std::size_t samples = 0;
};

inline double median_copy(std::vector<double> v) { return median_of(std::move(v)); }

/// Compares a digitized lead with the renderer's centerline over the columns
/// the signal covers. Both sides are centered by their own medians.
inline std::optional<RoundTrip> compare_lead(const LeadResult& lead, const LeadTruth& truth, double px_per_mm_true,
                                            double mv_per_mm = 0.1) {
  std::vector<double> got, want;
  for (std::size_t i = 0; i < lead.signal.v_mv.size(); ++i) {
    auto row = truth.row_at(lead.trace.col_offset + i);
    if (!row) continue;
    got.push_back(lead.signal.v_mv[i]);
    want.push_back(-*row * mv_per_mm / px_per_mm_true);
  }
  if (got.size() < 2) return std::nullopt;
  const double mw = median_copy(want);
  for (auto& w : want) w -= mw;
  double se = 0, sg = 0, sw = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    se += (got[i] - want[i]) * (got[i] - want[i]);
    sg += got[i];
    sw += want[i];
  }
  const double n = static_cast<double>(got.size());
  const double mg = sg / n, mwn = sw / n;
  double cov = 0, vg = 0, vw = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    cov += (got[i] - mg) * (want[i] - mwn);
    vg += (got[i] - mg) * (got[i] - mg);
    vw += (want[i] - mwn) * (want[i] - mwn);
  }
  return RoundTrip{std::sqrt(se / n), cov / std::sqrt(vg * vw), got.size()};
}

}  // namespace ecgd::testing

#endif  // ECGD_TESTS_SUPPORT_SHEETS_HPP
