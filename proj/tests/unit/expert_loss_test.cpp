#include <gtest/gtest.h>

#include <cmath>

#include "gdmopt/diffusion/expert_loss.hpp"
#include "gdmopt/error.hpp"
#include "test_support.hpp"

namespace gdmopt::diffusion {
namespace {

const std::size_t kHidden[] = {8, 8};

std::vector<ExpertExample> random_batch(std::size_t n, std::size_t dim, std::size_t cond, Rng& r) {
  std::vector<ExpertExample> b;
  for (std::size_t i = 0; i < n; ++i) b.push_back({testing::random_vec(cond, r), testing::random_vec(dim, r, -2, 2)});
  return b;
}

TEST(ExpertLoss, PerfectNoisePredictorGivesZero) {
  // T = 1 and x0 = 0 make x_1 = sqrt(1 - abar) eps, so a linear net reading
  // x_1 / sqrt(1 - abar) predicts eps exactly.
  const std::size_t D = 3, C = 2;
  const auto s = NoiseSchedule::make(1, ScheduleKind::kLinear, 0.4, 0.4);
  const std::size_t E = time_embedding_dim(1);
  Mat w = Mat::Zero(D, D + E + C);
  w.leftCols(D) = Mat::Identity(D, D) / std::sqrt(1.0 - s.alpha_bar(1));
  const ConditionalDenoiser d(nn::ParamSet({nn::Layer{w, Vec::Zero(D), nn::Activation::kLinear}}), D, C, 1);
  Rng r(1);
  std::vector<ExpertExample> batch(16, ExpertExample{Vec::Ones(C), Vec::Zero(D)});
  EXPECT_NEAR(expert_loss(d, s, batch, r).loss, 0.0, 1e-24);
}

TEST(ExpertLoss, ZeroDenoiserGivesChiSquareMean) {
  const std::size_t D = 4, C = 2;
  const int steps = 6;
  Rng r(2);
  auto d = ConditionalDenoiser::create(D, C, steps, kHidden, nn::Activation::kTanh, r);
  auto& last = d.mutable_net().mutable_layer(d.net().num_layers() - 1);
  last.weight.setZero();
  last.bias.setZero();
  const auto s = NoiseSchedule::make(steps, ScheduleKind::kVariancePreserving, 0.1, 2.0);
  const std::size_t n = 20000;
  const auto batch = random_batch(n, D, C, r);
  const double loss = expert_loss(d, s, batch, r).loss;
  EXPECT_NEAR(loss, static_cast<double>(D), 4.0 * std::sqrt(2.0 * D / n));
}

TEST(ExpertLoss, DrawsCoverEveryStep) {
  Rng r(3);
  const auto draws = draw_expert(5000, 2, 4, r);
  std::vector<int> seen(5, 0);
  for (int t : draws.steps) {
    ASSERT_GE(t, 1);
    ASSERT_LE(t, 4);
    ++seen[t];
  }
  for (int t = 1; t <= 4; ++t) EXPECT_NEAR(seen[t], 1250, 150);
}

TEST(ExpertLoss, GradientMatchesFiniteDifferences) {
  const std::size_t D = 2, C = 3;
  const int steps = 3;
  Rng r(4);
  auto d = ConditionalDenoiser::create(D, C, steps, kHidden, nn::Activation::kTanh, r);
  const auto s = NoiseSchedule::make(steps, ScheduleKind::kVariancePreserving, 0.1, 2.0);
  const auto batch = random_batch(5, D, C, r);
  const ExpertDraws draws = draw_expert(batch.size(), D, steps, r);
  const auto analytic = expert_loss(d, s, batch, draws);
  const auto numeric =
      testing::numeric_gradient(d.mutable_net(), [&] { return expert_loss(d, s, batch, draws).loss; });
  EXPECT_LT(testing::relative_error(analytic.grads.flatten(), numeric), 1e-3);
}

TEST(ExpertLoss, EmptyBatchRejected) {
  Rng r(5);
  const auto d = ConditionalDenoiser::create(2, 1, 2, kHidden, nn::Activation::kTanh, r);
  const auto s = NoiseSchedule::make(2, ScheduleKind::kLinear, 0.1, 0.2);
  try {
    (void)expert_loss(d, s, std::span<const ExpertExample>{}, r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyBatch);
  }
}

}  // namespace
}  // namespace gdmopt::diffusion
