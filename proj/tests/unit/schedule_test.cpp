#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gdmopt/diffusion/schedule.hpp"
#include "gdmopt/error.hpp"

namespace gdmopt::diffusion {
namespace {

void check_invariants(const NoiseSchedule& s) {
  double prod = 1.0;
  for (int t = 1; t <= s.steps(); ++t) {
    ASSERT_GT(s.beta(t), 0.0);
    ASSERT_LT(s.beta(t), 1.0);
    ASSERT_DOUBLE_EQ(s.alpha(t), 1.0 - s.beta(t));
    prod *= s.alpha(t);
    ASSERT_NEAR(s.alpha_bar(t), prod, 1e-12);
    if (t > 1) ASSERT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
  }
}

TEST(Schedule, LinearTwoSteps) {
  const auto s = NoiseSchedule::make(2, ScheduleKind::kLinear, 0.1, 0.2);
  EXPECT_NEAR(s.alpha(1), 0.9, 1e-15);
  EXPECT_NEAR(s.alpha(2), 0.8, 1e-15);
  EXPECT_NEAR(s.alpha_bar(1), 0.9, 1e-15);
  EXPECT_NEAR(s.alpha_bar(2), 0.72, 1e-15);
}

TEST(Schedule, SingleStep) {
  const auto s = NoiseSchedule::make(1, ScheduleKind::kLinear, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.5);
}

TEST(Schedule, VariancePreservingNineSteps) {
  const auto s = NoiseSchedule::make(9, ScheduleKind::kVariancePreserving, 0.1, 10.0);
  check_invariants(s);
  EXPECT_LT(s.alpha_bar(9), s.alpha_bar(1));
  // Independent evaluation of the VP formula; alpha_bar(T) telescopes to
  // exp(-(beta_min + (beta_max - beta_min) / 2)).
  for (int t = 1; t <= 9; ++t) {
    const double b = 1.0 - std::exp(-0.1 / 9 - 9.9 * (2 * t - 1) / (2.0 * 81));
    EXPECT_NEAR(s.beta(t), b, 1e-15);
  }
  EXPECT_NEAR(s.alpha_bar(9), std::exp(-(0.1 + 9.9 / 2)), 1e-12);
}

TEST(Schedule, InvalidBoundsRejected) {
  EXPECT_THROW(NoiseSchedule::make(0, ScheduleKind::kLinear, 0.1, 0.2), Error);
  EXPECT_THROW(NoiseSchedule::make(3, ScheduleKind::kLinear, 0.0, 0.2), Error);
  EXPECT_THROW(NoiseSchedule::make(3, ScheduleKind::kLinear, 0.3, 0.2), Error);
  EXPECT_THROW(NoiseSchedule::make(3, ScheduleKind::kLinear, 0.1, 1.0), Error);
  EXPECT_THROW(NoiseSchedule::make(3, ScheduleKind::kVariancePreserving, -1.0, 2.0), Error);
}

TEST(Schedule, StepOutOfRange) {
  const auto s = NoiseSchedule::make(3, ScheduleKind::kLinear, 0.1, 0.2);
  EXPECT_THROW((void)s.beta(0), Error);
  EXPECT_THROW((void)s.alpha_bar(4), Error);
}

TEST(Schedule, KindNamesRoundTrip) {
  for (auto k : {ScheduleKind::kLinear, ScheduleKind::kVariancePreserving})
    EXPECT_EQ(parse_schedule_kind(schedule_kind_name(k)), k);
  EXPECT_FALSE(parse_schedule_kind("cosine"));
}

// 10^4 random schedules of both kinds.
TEST(Schedule, PropertyInvariantsHold) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int steps = 1 + static_cast<int>(u(gen) * 20);
    const bool vp = trial % 2 == 0;
    const double lo = vp ? 0.01 + 2.0 * u(gen) : 1e-4 + 0.5 * u(gen);
    const double hi = vp ? lo + 20.0 * u(gen) : lo + (0.999 - lo) * u(gen);
    const auto s = NoiseSchedule::make(steps, vp ? ScheduleKind::kVariancePreserving : ScheduleKind::kLinear, lo, hi);
    check_invariants(s);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace
}  // namespace gdmopt::diffusion
