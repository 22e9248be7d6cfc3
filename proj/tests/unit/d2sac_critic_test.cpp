#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gdmopt/d2sac/critic.hpp"
#include "gdmopt/error.hpp"
#include "test_support.hpp"

namespace gdmopt::d2sac {
namespace {

DiffusionActor make_actor(std::size_t state_dim, std::size_t actions, int steps, std::uint64_t seed = 1) {
  Rng r(seed);
  const std::vector<std::size_t> hidden = {16};
  return DiffusionActor::create(state_dim, actions, steps, hidden, nn::Activation::kTanh,
                                diffusion::ScheduleKind::kVariancePreserving, 0.1, 2.0, r);
}

// Critic whose every network outputs `q` regardless of the state.
DoubleCritic constant_critic(std::size_t state_dim, const Vec& q, double entropy_coef) {
  Rng r(1);
  const std::vector<std::size_t> hidden = {8};
  DoubleCritic c = DoubleCritic::create(state_dim, static_cast<std::size_t>(q.size()), hidden,
                                        nn::Activation::kTanh, r, CriticConfig{0.9, 0.005, entropy_coef});
  for (nn::ParamSet* net : {&c.q1, &c.q2, &c.target1, &c.target2}) {
    net->assign(std::vector<double>(net->parameter_count(), 0.0));
    net->mutable_layer(net->num_layers() - 1).bias = q;
  }
  return c;
}

std::vector<Transition> batch_of(std::size_t n, std::size_t state_dim, Rng& r) {
  std::vector<Transition> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec s(state_dim), s2(state_dim);
    for (auto& v : s) v = r.normal();
    for (auto& v : s2) v = r.normal();
    out.push_back(Transition{s, 0, 1.0, s2, false});
  }
  return out;
}

TEST(TdTargets, HandComputedTwoActions) {
  Mat p(2, 1), q1(2, 1), q2(2, 1);
  p << 0.25, 0.75;
  q1 << 2.0, 5.0;
  q2 << 3.0, 4.0;
  const Vec y = td_targets(p, q1, q2, Vec::Constant(1, 1.5), {false}, 0.9, 0.1);
  const double soft = 0.25 * (2.0 - 0.1 * std::log(0.25)) + 0.75 * (4.0 - 0.1 * std::log(0.75));
  EXPECT_NEAR(y(0), 1.5 + 0.9 * soft, 1e-12);
}

TEST(TdTargets, TerminalAndZeroDiscountReduceToReward) {
  Mat p = Mat::Constant(3, 2, 1.0 / 3.0);
  Mat q = Mat::Constant(3, 2, 100.0);
  const Vec r = (Vec(2) << 0.5, -2.0).finished();
  const Vec terminal = td_targets(p, q, q, r, {true, true}, 0.99, 0.2);
  EXPECT_EQ(terminal, r);
  const Vec myopic = td_targets(p, q, q, r, {false, false}, 0.0, 0.2);
  EXPECT_EQ(myopic, r);
  const Vec mixed = td_targets(p, q, q, r, {true, false}, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(mixed(0), 0.5);
  EXPECT_DOUBLE_EQ(mixed(1), -2.0 + 50.0);
}

TEST(TdTargets, ZeroProbabilityActionsContributeNothing) {
  Mat p(2, 1), q(2, 1);
  p << 1.0, 0.0;
  q << 3.0, -1e9;
  EXPECT_DOUBLE_EQ(td_targets(p, q, q, Vec::Zero(1), {false}, 1.0, 1.0)(0), 3.0);
}

TEST(TdTargets, ShapeMismatchIsRejected) {
  EXPECT_THROW(td_targets(Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(3, 2), Vec::Zero(2), {false, false}, 0.9, 0),
               Error);
  EXPECT_THROW(td_targets(Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2), Vec::Zero(2), {false}, 0.9, 0), Error);
}

// Property: the conservative estimate never exceeds either critic.
TEST(ConservativeMin, PropertyLowerBound) {
  Rng r(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat a = testing::random_mat(3, 4, r), b = testing::random_mat(3, 4, r);
    const Mat m = conservative_min(a, b);
    ASSERT_TRUE((m.array() <= a.array()).all());
    ASSERT_TRUE((m.array() <= b.array()).all());
    ASSERT_TRUE(((m.array() == a.array()) || (m.array() == b.array())).all());
  }
}

TEST(ActorObjective, ConstantCriticWithoutEntropyHasZeroGradient) {
  const DiffusionActor actor = make_actor(2, 3, 3);
  const DoubleCritic c = constant_critic(2, Vec::Constant(3, 4.0), 0.0);
  Rng r(3);
  const Mat states = testing::random_mat(2, 6, r);
  const auto noise = diffusion::draw_chain_noise(3, 6, 3, r);
  const ActorObjective obj = actor_objective(actor, c, states, noise);
  EXPECT_NEAR(obj.loss, -4.0, 1e-12);
  EXPECT_LT(obj.grads.norm(), 1e-12);
}

TEST(ActorObjective, LossMatchesDefinition) {
  const DiffusionActor actor = make_actor(2, 3, 3);
  const Vec q = (Vec(3) << 1.0, -0.5, 2.0).finished();
  const DoubleCritic c = constant_critic(2, q, 0.3);
  Rng r(4);
  const Mat states = testing::random_mat(2, 5, r);
  const auto noise = diffusion::draw_chain_noise(3, 5, 3, r);
  const ActorObjective obj = actor_objective(actor, c, states, noise);
  double expected = 0.0, h = 0.0;
  for (Eigen::Index b = 0; b < 5; ++b) {
    const Vec p = obj.probs.col(b);
    expected -= p.dot(q) + 0.3 * entropy(p);
    h += entropy(p);
  }
  EXPECT_NEAR(obj.loss, expected / 5.0, 1e-12);
  EXPECT_NEAR(obj.entropy_mean, h / 5.0, 1e-12);
  const Mat again = softmax_columns(actor.logits(states, noise) / actor.temperature());
  EXPECT_LT((again - obj.probs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ActorObjective, GradientMatchesFiniteDifferences) {
  DiffusionActor actor = make_actor(2, 3, 2);
  Rng cr(5);
  const std::vector<std::size_t> hidden = {8};
  const DoubleCritic c = DoubleCritic::create(2, 3, hidden, nn::Activation::kTanh, cr, CriticConfig{0.9, 0.005, 0.2});
  Rng r(6);
  const Mat states = testing::random_mat(2, 4, r);
  const auto noise = diffusion::draw_chain_noise(3, 4, 2, r);
  const ActorObjective obj = actor_objective(actor, c, states, noise);
  nn::ParamSet& net = actor.mutable_denoiser().mutable_net();
  const std::vector<double> numeric =
      testing::numeric_gradient(net, [&] { return actor_objective(actor, c, states, noise).loss; });
  EXPECT_LT(testing::relative_error(obj.grads.flatten(), numeric), 1e-4);
}

TEST(ActorUpdate, StrongEntropyDrivesTowardsUniform) {
  DiffusionActor actor = make_actor(2, 3, 2);
  const DoubleCritic c = constant_critic(2, (Vec(3) << 1.0, 0.0, 0.5).finished(), 50.0);
  auto opt = nn::AdamState::for_params(actor.denoiser().net(), {.learning_rate = 1e-2});
  Rng r(7);
  const auto batch = batch_of(16, 2, r);
  for (int i = 0; i < 300; ++i) actor_update(actor, c, batch, opt, r);
  const Vec p = actor.mean_probabilities(batch[0].state);
  EXPECT_LT(0.5 * (p.array() - 1.0 / 3.0).abs().sum(), 0.05);
}

TEST(ActorUpdate, BanditWithoutEntropyPicksBestAction) {
  DiffusionActor actor = make_actor(2, 2, 2);
  const DoubleCritic c = constant_critic(2, (Vec(2) << 1.0, 0.0).finished(), 0.0);
  auto opt = nn::AdamState::for_params(actor.denoiser().net(), {.learning_rate = 1e-2});
  Rng r(8);
  const auto batch = batch_of(16, 2, r);
  for (int i = 0; i < 300; ++i) actor_update(actor, c, batch, opt, r);
  EXPECT_GT(actor.mean_probabilities(batch[0].state)(0), 0.95);
}

TEST(CriticUpdate, RegressesOnlineCriticsAndTracksTargets) {
  const DiffusionActor actor = make_actor(2, 2, 2);
  Rng cr(9);
  const std::vector<std::size_t> hidden = {16};
  DoubleCritic c = DoubleCritic::create(2, 2, hidden, nn::Activation::kTanh, cr, CriticConfig{0.0, 0.5, 0.0});
  auto o1 = nn::AdamState::for_params(c.q1, {.learning_rate = 1e-2});
  auto o2 = nn::AdamState::for_params(c.q2, {.learning_rate = 1e-2});
  Rng r(10);
  auto batch = batch_of(32, 2, r);
  for (auto& t : batch) t.reward = 2.0;
  const auto t1_before = c.target1.flatten();
  CriticLosses first = critic_update(c, actor, batch, o1, o2, r);
  EXPECT_NE(c.target1.flatten(), t1_before);
  EXPECT_EQ(first.targets, Vec::Constant(32, 2.0));  // gamma = 0
  CriticLosses last = first;
  for (int i = 0; i < 300; ++i) last = critic_update(c, actor, batch, o1, o2, r);
  EXPECT_LT(last.q1, 0.01 * first.q1);
  EXPECT_LT(last.q2, 0.01 * first.q2);
}

TEST(DoubleCritic, ValidateRejectsBadConfig) {
  Rng r(1);
  const std::vector<std::size_t> hidden = {4};
  EXPECT_THROW(DoubleCritic::create(2, 2, hidden, nn::Activation::kTanh, r, CriticConfig{1.5, 0.005, 0.1}), Error);
  EXPECT_THROW(DoubleCritic::create(2, 2, hidden, nn::Activation::kTanh, r, CriticConfig{0.9, 0.0, 0.1}), Error);
  EXPECT_THROW(DoubleCritic::create(2, 2, hidden, nn::Activation::kTanh, r, CriticConfig{0.9, 0.005, -1}), Error);
}

}  // namespace
}  // namespace gdmopt::d2sac
