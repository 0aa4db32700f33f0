#include <gtest/gtest.h>

#include <random>

#include "ecgd/calibrate.hpp"

using namespace ecgd;

namespace {

ColumnTrace trace_of(const std::vector<double>& rows) {
  ColumnTrace t;
  for (double r : rows) t.rows.push_back(r);
  return t;
}

double median_copy(std::vector<double> v) { return median_of(std::move(v)); }

}  // namespace

TEST(ToSignal, ConstantTraceIsZero) {
  const Signal s = to_signal(trace_of({50, 50, 50}), {23.622, 0.1, 40}, 0);
  EXPECT_EQ(s.v_mv, (std::vector<double>{0, 0, 0}));
}

TEST(ToSignal, TwoRowHandExample) {
  const Signal s = to_signal(trace_of({10, 20}), {10.0, 0.1, 40.0}, 3);
  EXPECT_EQ(s.lead_index, 3u);
  ASSERT_EQ(s.v_mv.size(), 2u);
  EXPECT_NEAR(s.v_mv[0], 0.05, 1e-9);
  EXPECT_NEAR(s.v_mv[1], -0.05, 1e-9);
  EXPECT_NEAR(s.t_ms[0], 0.0, 1e-9);
  EXPECT_NEAR(s.t_ms[1], 4.0, 1e-9);
}

TEST(ToSignal, SixHundredDpiQuantum) {
  const Signal s = to_signal(trace_of({0, 1}), {600.0 / 25.4, 0.1, 40.0}, 0);
  EXPECT_NEAR(s.v_mv[0] - s.v_mv[1], 0.1 * 25.4 / 600.0, 1e-12);
  EXPECT_NEAR(s.v_mv[0] - s.v_mv[1], 0.004233, 1e-6);
}

TEST(ToSignal, InvariantsOnRandomTraces) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> row(0, 500);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> rows(2 + rng() % 300);
    for (auto& r : rows) r = std::round(row(rng));
    const Calibration cal{std::uniform_real_distribution<double>(8, 40)(rng), 0.1, 40.0};
    const Signal s = to_signal(trace_of(rows), cal, 0);
    ASSERT_EQ(s.t_ms.size(), rows.size());
    ASSERT_EQ(s.v_mv.size(), rows.size());
    EXPECT_EQ(s.t_ms[0], 0.0);
    const double step = cal.ms_per_mm / cal.px_per_mm;
    for (std::size_t i = 1; i < s.t_ms.size(); ++i) EXPECT_NEAR(s.t_ms[i] - s.t_ms[i - 1], step, 1e-9);
    EXPECT_NEAR(median_copy(s.v_mv), 0.0, 1e-9);

    // Vertical translation leaves the centered signal alone.
    std::vector<double> shifted = rows;
    for (auto& r : shifted) r += 17;
    const Signal t = to_signal(trace_of(shifted), cal, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_NEAR(t.v_mv[i], s.v_mv[i], 1e-9);

    // Doubling the pitch halves time steps and amplitudes.
    const Signal d = to_signal(trace_of(rows), {2 * cal.px_per_mm, 0.1, 40.0}, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_NEAR(d.v_mv[i], 0.5 * s.v_mv[i], 1e-9);
      EXPECT_NEAR(d.t_ms[i], 0.5 * s.t_ms[i], 1e-9);
    }
  }
}

TEST(ToSignal, RowsGrowDownVoltsGrowUp) {
  const Signal s = to_signal(trace_of({30, 10, 30}), {10.0, 0.1, 40.0}, 0);
  EXPECT_GT(s.v_mv[1], s.v_mv[0]);
}

TEST(ToSignal, RejectsMissingAndBadCalibration) {
  ColumnTrace t = trace_of({1, 2});
  t.rows.push_back(std::nullopt);
  try {
    to_signal(t, {10, 0.1, 40}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_values);
  }
  EXPECT_THROW(to_signal(trace_of({1, 2}), {0.0, 0.1, 40}, 0), Error);
  EXPECT_THROW(to_signal(trace_of({1, 2}), {10, -0.1, 40}, 0), Error);
}

TEST(ToSignal, LiteralMillisecondConstantIsAccepted) {
  const Signal s = to_signal(trace_of({0, 0, 0}), {10.0, 0.1, 0.04}, 0);
  EXPECT_NEAR(s.t_ms[2], 0.008, 1e-12);
}
