#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gdmopt/envs/power.hpp"
#include "gdmopt/envs/bandit_env.hpp"
#include "gdmopt/error.hpp"
#include "gdmopt/gdm/replay_buffer.hpp"
#include "gdmopt/gdm/trainer.hpp"

namespace gdmopt::gdm {
namespace {

GdmTrainConfig small_config(std::int64_t epochs) {
  GdmTrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch = 16;
  cfg.steps = 3;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  cfg.eval_states = 8;
  return cfg;
}

class NanEnv final : public envs::BanditEnv {
 public:
  std::string_view name() const override { return "nan"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t solution_dim() const override { return 1; }
  Vec sample_state(Rng&) const override { return Vec::Ones(1); }
  Vec squash(const Vec& z, const Vec&) const override { return z; }
  Vec squash_vjp(const Vec&, const Vec&, const Vec& u) const override { return u; }
  double evaluate(const Vec&, const Vec&) const override { return NAN; }
  Vec encode(const Vec& p, const Vec&) const override { return p; }
  Vec random_solution(const Vec&, Rng&) const override { return Vec::Zero(1); }
};

TEST(TrainOnline, SingleChannelGapIsZeroImmediately) {
  const auto env = envs::power_env(1, 0.5, 2.5, 10.0);
  Rng r(1);
  const auto res = train_online(*env, small_config(10), r);
  ASSERT_EQ(res.metrics.size(), 1u);
  EXPECT_NEAR(*res.metrics[0].gap_mean, 0.0, 1e-12);
}

TEST(TrainOnline, DeterministicGivenSeed) {
  const auto env = envs::power_env(3, 0.5, 2.5, 10.0);
  Rng a(5), b(5);
  const auto ra = train_online(*env, small_config(40), a);
  const auto rb = train_online(*env, small_config(40), b);
  ASSERT_EQ(ra.metrics.size(), 4u);
  for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
    EXPECT_EQ(ra.metrics[i].gap_mean, rb.metrics[i].gap_mean);
    EXPECT_EQ(ra.metrics[i].actor_loss, rb.metrics[i].actor_loss);
    EXPECT_EQ(ra.metrics[i].critic_loss, rb.metrics[i].critic_loss);
  }
  EXPECT_EQ(ra.model.denoiser.net().flatten(), rb.model.denoiser.net().flatten());
}

TEST(TrainOnline, SigmaDecaysToFloor) {
  const auto env = envs::power_env(2, 0.5, 2.5, 10.0);
  auto cfg = small_config(30);
  cfg.sigma_decay = 0.5;
  cfg.sigma_floor = 0.02;
  Rng r(2);
  const auto res = train_online(*env, cfg, r);
  EXPECT_DOUBLE_EQ(*res.metrics[0].sigma, 0.02);
  cfg.sigma_decay = 0.999;
  Rng r2(2);
  EXPECT_NEAR(*train_online(*env, cfg, r2).metrics[0].sigma, 0.1 * std::pow(0.999, 9), 1e-15);
}

TEST(TrainOnline, ActorAndCriticUpdatesTouchOnlyTheirOwnNetwork) {
  const auto env = envs::power_env(3, 0.5, 2.5, 10.0);
  auto cfg = small_config(20);
  Rng init(7);
  Rng init_copy = init.split("init");
  const GdmModel fresh = make_gdm_model(*env, cfg, init_copy);

  cfg.critic_updates = 0;
  Rng r1(7);
  const auto actor_only = train_online(*env, cfg, r1);
  EXPECT_EQ(actor_only.model.evaluator->net().flatten(), fresh.evaluator->net().flatten());
  EXPECT_NE(actor_only.model.denoiser.net().flatten(), fresh.denoiser.net().flatten());

  cfg.critic_updates = 1;
  cfg.actor_updates = 0;
  Rng r2(7);
  const auto critic_only = train_online(*env, cfg, r2);
  EXPECT_EQ(critic_only.model.denoiser.net().flatten(), fresh.denoiser.net().flatten());
  EXPECT_NE(critic_only.model.evaluator->net().flatten(), fresh.evaluator->net().flatten());
}

TEST(TrainOnline, ActorDelayHoldsTheDenoiserUntilItExpires) {
  const auto env = envs::power_env(3, 0.5, 2.5, 10.0);
  auto cfg = small_config(20);
  Rng init(9);
  Rng init_copy = init.split("init");
  const GdmModel fresh = make_gdm_model(*env, cfg, init_copy);

  cfg.actor_delay = 20;
  Rng r1(9);
  const auto held = train_online(*env, cfg, r1);
  EXPECT_EQ(held.model.denoiser.net().flatten(), fresh.denoiser.net().flatten());
  for (const MetricsRow& row : held.metrics) EXPECT_FALSE(row.actor_loss.has_value());

  cfg.actor_delay = 19;
  Rng r2(9);
  const auto released = train_online(*env, cfg, r2);
  EXPECT_NE(released.model.denoiser.net().flatten(), fresh.denoiser.net().flatten());
  EXPECT_TRUE(released.metrics.back().actor_loss.has_value());
}

TEST(TrainOnline, RewardScaleScalesTheCriticLoss) {
  // With the actor held, both runs see identical experience and policies, so
  // only the critic's fit differs.
  const auto env = envs::power_env(3, 0.5, 2.5, 10.0);
  auto cfg = small_config(10);
  cfg.actor_delay = 10;
  Rng a(4), b(4), c(4);
  const auto base = train_online(*env, cfg, a);
  cfg.reward_scale = 0.5;
  const auto scaled = train_online(*env, cfg, b);
  const auto again = train_online(*env, cfg, c);
  ASSERT_TRUE(base.metrics.back().critic_loss && scaled.metrics.back().critic_loss);
  EXPECT_NE(*base.metrics.back().critic_loss, *scaled.metrics.back().critic_loss);
  EXPECT_EQ(scaled.metrics.back().critic_loss, again.metrics.back().critic_loss);
  EXPECT_EQ(base.metrics.back().gap_mean, scaled.metrics.back().gap_mean);
}

TEST(TrainOnline, NonFiniteRewardAborts) {
  const NanEnv env;
  Rng r(1);
  try {
    (void)train_online(env, small_config(5), r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(TrainOnline, HookSeesEveryRow) {
  const auto env = envs::power_env(2, 0.5, 2.5, 10.0);
  std::vector<std::int64_t> epochs;
  GdmHooks hooks{[&](const MetricsRow& row, const GdmModel&) { epochs.push_back(row.epoch); }};
  Rng r(3);
  (void)train_online(*env, small_config(30), r, hooks);
  EXPECT_EQ(epochs, (std::vector<std::int64_t>{10, 20, 30}));
}

TEST(GdmTrainConfig, ValidationRejectsBadValues) {
  auto bad = [](auto mutate) {
    GdmTrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), Error);
  };
  bad([](GdmTrainConfig& c) { c.epochs = -1; });
  bad([](GdmTrainConfig& c) { c.batch = 0; });
  bad([](GdmTrainConfig& c) { c.actor_lr = -1; });
  bad([](GdmTrainConfig& c) { c.sigma = -0.1; });
  bad([](GdmTrainConfig& c) { c.steps = 0; });
  bad([](GdmTrainConfig& c) { c.eval_every = 0; });
  bad([](GdmTrainConfig& c) { c.reward_scale = 0.0; });
  bad([](GdmTrainConfig& c) { c.actor_delay = -1; });
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  const auto env = envs::power_env(3, 0.5, 2.5, 10.0);
  Rng r(4);
  const GdmModel m = make_gdm_model(*env, small_config(1), r);
  Rng s1(9), s4(9);
  const EvalSet one = EvalSet::draw(*env, 40, s1, 1);
  const EvalSet four = EvalSet::draw(*env, 40, s4, 4);
  const auto a = evaluate_policy(m, *env, one, Rng(11), 1);
  const auto b = evaluate_policy(m, *env, four, Rng(11), 4);
  EXPECT_EQ(a.rewards, b.rewards);
  EXPECT_EQ(a.gap_mean, b.gap_mean);
  for (std::size_t i = 0; i < a.rewards.size(); ++i) EXPECT_LE(a.rewards[i], a.oracle_rewards[i] + 1e-9);
}

TEST(Infer, NoExplorationNoiseAndFeasible) {
  const auto env = envs::power_env(3, 0.5, 2.5, 10.0);
  Rng r(5);
  const GdmModel m = make_gdm_model(*env, small_config(1), r);
  const Vec g = env->sample_state(r);
  Rng a(1), b(1);
  const auto x = infer(m, *env, g, a), y = infer(m, *env, g, b);
  EXPECT_EQ(x.solution, y.solution);
  EXPECT_NEAR(x.solution.sum(), 10.0, 1e-9);
  EXPECT_DOUBLE_EQ(x.reward, env->evaluate(g, x.solution));
}

TEST(TrainExpert, MemorisesSingleExample) {
  envs::PowerEnvConfig pc;
  pc.fixed_gains = (Vec(3) << 1.0, 0.5, 2.5).finished();
  const envs::PowerEnv env(pc);
  Rng data_rng(1);
  const auto data = make_expert_dataset(env, 1, data_rng);
  auto cfg = small_config(1500);
  cfg.eval_every = 1500;
  cfg.actor_lr = 3e-3;
  Rng r(2);
  const auto res = train_expert(env, data, cfg, r);
  const double expert = env.oracle(pc.fixed_gains)->reward;
  EXPECT_LT(*res.metrics.back().gap_mean, 1e-2);
  EXPECT_FALSE(res.model.evaluator.has_value());
  EXPECT_NEAR(res.metrics.back().reward_mean.value(), expert, 1e-2);
}

TEST(TrainExpert, EmptyDatasetRejected) {
  const auto env = envs::power_env(2, 0.5, 2.5, 10.0);
  Rng r(1);
  EXPECT_THROW(train_expert(*env, {}, small_config(1), r), Error);
}

TEST(ExpertDataset, LabelsDecodeToWaterFilling) {
  const auto env = envs::power_env(4, 0.5, 5.0, 10.0);
  Rng r(8), again(8);
  const auto data = make_expert_dataset(*env, 20, r);
  for (const auto& ex : data) {
    const Vec g = env->sample_state(again);
    const Vec p = env->squash(ex.solution, g);
    EXPECT_NEAR(env->evaluate(g, p), envs::water_filling(g, 10.0).rate, 0.05);
  }
}

TEST(ReplayBuffer, FifoEvictionAndSampling) {
  ReplayBuffer<int> buf(3);
  for (int i = 0; i < 5; ++i) buf.push(i);
  ASSERT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0), 2);
  EXPECT_EQ(buf.at(2), 4);
  Rng r(1);
  auto s = buf.sample(10, r);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(s, (std::vector<int>{2, 3, 4}));
  EXPECT_THROW(ReplayBuffer<int>(0), Error);
  EXPECT_THROW(ReplayBuffer<int>(2).sample(1, r), Error);
}

// Property: after any push sequence the buffer holds the last `capacity`
// items in insertion order.
TEST(ReplayBuffer, PropertyFifoOrder) {
  Rng r(2);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t cap = 1 + static_cast<std::size_t>(r.uniform_int(0, 20));
    const int n = r.uniform_int(0, 60);
    ReplayBuffer<int> buf(cap);
    for (int i = 0; i < n; ++i) buf.push(i);
    const int held = std::min<int>(n, static_cast<int>(cap));
    ASSERT_EQ(buf.size(), static_cast<std::size_t>(held));
    for (int i = 0; i < held; ++i) ASSERT_EQ(buf.at(static_cast<std::size_t>(i)), n - held + i);
  }
}

}  // namespace
}  // namespace gdmopt::gdm
