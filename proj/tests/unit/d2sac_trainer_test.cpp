#include <gtest/gtest.h>

#include <cmath>

#include "gdmopt/d2sac/trainer.hpp"
#include "gdmopt/envs/constant.hpp"
#include "gdmopt/envs/provider.hpp"
#include "gdmopt/error.hpp"

namespace gdmopt::d2sac {
namespace {

D2sacConfig small_config(std::int64_t steps) {
  D2sacConfig cfg;
  cfg.total_steps = steps;
  cfg.batch = 32;
  cfg.buffer_capacity = 5000;
  cfg.steps = 3;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  cfg.warmup_steps = 100;
  cfg.eval_every = 100;
  cfg.eval_episodes = 3;
  cfg.beta_max = 2.0;
  return cfg;
}

double tree_value(const envs::MdpEnv& env, Rng rng) {
  double best = -INFINITY;
  for (int a = 0; a < static_cast<int>(env.num_actions()); ++a) {
    auto e = env.clone();
    Rng r = rng;
    const envs::StepResult s = e->step(a, r);
    best = std::max(best, s.reward + (s.done() ? 0.0 : tree_value(*e, r)));
  }
  return best;
}

TEST(TrainMdp, ConstantRewardGivesFlatCurve) {
  envs::ConstantEnv env({.actions = 3, .horizon = 7, .reward = 2.5});
  Rng r(1);
  const auto res = train_mdp(env, small_config(500), r);
  ASSERT_EQ(res.metrics.size(), 5u);
  for (const auto& row : res.metrics) {
    EXPECT_DOUBLE_EQ(*row.reward_mean, 17.5);
    EXPECT_DOUBLE_EQ(*row.reward_std, 0.0);
    // Learning starts after the warm-up steps.
    EXPECT_EQ(row.critic_loss.has_value(), row.epoch > 100);
  }
  EXPECT_EQ(res.metrics[0].epoch, 100);
}

TEST(TrainMdp, DeterministicGivenSeed) {
  envs::ConstantEnv env({.actions = 2, .horizon = 5, .reward = 1.0});
  Rng a(3), b(3);
  const auto ra = train_mdp(env, small_config(300), a);
  const auto rb = train_mdp(env, small_config(300), b);
  ASSERT_EQ(ra.metrics.size(), rb.metrics.size());
  for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
    EXPECT_EQ(ra.metrics[i].actor_loss, rb.metrics[i].actor_loss);
    EXPECT_EQ(ra.metrics[i].critic_loss, rb.metrics[i].critic_loss);
  }
  EXPECT_EQ(ra.model.actor.denoiser().net().flatten(), rb.model.actor.denoiser().net().flatten());
}

TEST(TrainMdp, ZeroStepsYieldsNoRows) {
  envs::ConstantEnv env;
  Rng r(1);
  const auto res = train_mdp(env, small_config(0), r);
  EXPECT_TRUE(res.metrics.empty());
}

TEST(TrainMdp, ValidationRejectsBadValues) {
  envs::ConstantEnv env;
  auto bad = [&](auto mutate) {
    D2sacConfig c = small_config(10);
    mutate(c);
    Rng r(1);
    EXPECT_THROW(train_mdp(env, c, r), Error);
  };
  bad([](D2sacConfig& c) { c.critic.gamma = 1.0; });
  bad([](D2sacConfig& c) { c.critic.tau = 0.0; });
  bad([](D2sacConfig& c) { c.batch = 0; });
  bad([](D2sacConfig& c) { c.temperature = 0.0; });
  bad([](D2sacConfig& c) { c.eval_every = 0; });
}

TEST(TrainMdp, ProviderSelectionReachesTreeOptimum) {
  envs::ProviderEnvConfig pc;
  pc.capacities = {3, 6};
  pc.qualities = {3, 1};
  pc.tasks = {{2, 3}, {2, 3}, {1, 3}};
  pc.horizon = 3;
  envs::ProviderEnv env(pc);
  Rng probe(0);
  envs::ProviderEnv root = env;
  root.reset(probe);
  const double optimum = tree_value(root, probe);
  ASSERT_NEAR(optimum, 4 * std::log(3.0) + 3 * std::log(4.0 / 3.0), 1e-9);

  D2sacConfig cfg = small_config(3000);
  cfg.eval_every = 500;
  cfg.critic.gamma = 0.9;
  cfg.critic.entropy_coef = 0.01;
  cfg.actor_lr = 1e-3;
  cfg.critic_lr = 1e-3;
  Rng r(2);
  const auto res = train_mdp(env, cfg, r);
  const auto summary = evaluate_greedy(res.model.actor, env, 5, Rng(9));
  EXPECT_GE(summary.return_mean, 0.95 * optimum);
}

TEST(EvaluateGreedy, EpisodesAreReproducible) {
  envs::ConstantEnv env({.actions = 2, .horizon = 4, .reward = 1.0});
  Rng r(1);
  const D2sacModel m = make_d2sac_model(env, small_config(1), r);
  const auto a = evaluate_greedy(m.actor, env, 4, Rng(5));
  const auto b = evaluate_greedy(m.actor, env, 4, Rng(5));
  EXPECT_EQ(a.returns, b.returns);
  EXPECT_EQ(a.episodes, 4u);
  EXPECT_DOUBLE_EQ(a.return_mean, 4.0);
}

}  // namespace
}  // namespace gdmopt::d2sac
