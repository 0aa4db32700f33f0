#ifndef ECGD_CALIBRATE_HPP
#define ECGD_CALIBRATE_HPP

#include <cmath>
#include <vector>

#include "ecgd/trace.hpp"

namespace ecgd {

inline constexpr double kDefaultMvPerMm = 0.1;
// 25 mm/s paper speed.
inline constexpr double kDefaultMsPerMm = 40.0;

struct Calibration {
  double px_per_mm = 0.0;
  double mv_per_mm = kDefaultMvPerMm;
  double ms_per_mm = kDefaultMsPerMm;

  void validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(px_per_mm) || !ok(mv_per_mm) || !ok(ms_per_mm)) {
      throw Error(ErrorCode::invalid_argument, "calibration constants must be positive and finite");
    }
  }
};

struct Signal {
  std::size_t lead_index = 0;
  std::vector<double> t_ms;
  std::vector<double> v_mv;
};

/// Pixel trace to milliseconds and median-centered millivolts. Rows grow
/// downward, so amplitudes are negated.
inline Signal to_signal(const ColumnTrace& tr, const Calibration& cal, std::size_t lead) {
  cal.validate();
  if (!tr.complete()) throw Error(ErrorCode::missing_values, "to_signal: trace still has missing columns");
  if (tr.rows.empty()) throw Error(ErrorCode::empty_image, "to_signal: empty trace");
  const double ms_per_px = cal.ms_per_mm / cal.px_per_mm;
  const double mv_per_px = cal.mv_per_mm / cal.px_per_mm;
  Signal s;
  s.lead_index = lead;
  s.t_ms.resize(tr.rows.size());
  s.v_mv.resize(tr.rows.size());
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    s.t_ms[i] = static_cast<double>(i) * ms_per_px;
    s.v_mv[i] = -*tr.rows[i] * mv_per_px;
  }
  const double center = median_of(s.v_mv);
  for (auto& v : s.v_mv) v -= center;
  return s;
}

}  // namespace ecgd

#endif  // ECGD_CALIBRATE_HPP
