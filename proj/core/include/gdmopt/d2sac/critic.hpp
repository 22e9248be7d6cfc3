#pragma once

#include <span>
#include <vector>

#include "gdmopt/d2sac/actor.hpp"
#include "gdmopt/d2sac/replay_memory.hpp"
#include "gdmopt/nn/adam.hpp"

namespace gdmopt::d2sac {

struct CriticConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double entropy_coef = 0.05;
};

// Two state -> Q(s, .) networks and their slowly tracking target copies.
struct DoubleCritic {
  nn::ParamSet q1;
  nn::ParamSet q2;
  nn::ParamSet target1;
  nn::ParamSet target2;
  CriticConfig config;

  static DoubleCritic create(std::size_t state_dim, std::size_t actions, std::span<const std::size_t> hidden,
                             nn::Activation activation, Rng& rng, CriticConfig config = {});
  void validate() const;
};

// y_b = r_b + gamma (1 - done_b) sum_a pi_b(a) [min(Qbar1, Qbar2)(a) - lambda log pi_b(a)]
// with next-state quantities given as A x B matrices.
Vec td_targets(const Mat& next_probs, const Mat& target_q1, const Mat& target_q2, const Vec& rewards,
               const std::vector<bool>& terminal, double gamma, double entropy_coef);

// Elementwise min, checked to be a lower bound of both inputs.
Mat conservative_min(const Mat& a, const Mat& b);

struct CriticLosses {
  double q1 = 0.0;
  double q2 = 0.0;
  Vec targets;
};

// Regresses both online critics to the TD target, then soft-updates targets.
CriticLosses critic_update(DoubleCritic& c, const DiffusionActor& actor, std::span<const Transition> batch,
                           nn::AdamState& opt1, nn::AdamState& opt2, Rng& rng);

struct ActorObjective {
  double loss = 0.0;          // -mean_s [sum_a pi Q + lambda H]
  double entropy_mean = 0.0;  // mean H(pi(. | s)) over the batch
  nn::GradSet grads;
  Mat probs;                  // A x B
};

// Policy loss against min(Q1, Q2), differentiated through the softmax and
// the whole reverse chain.
ActorObjective actor_objective(const DiffusionActor& actor, const DoubleCritic& c, const Mat& states,
                               const diffusion::ChainNoise& noise);
double actor_update(DiffusionActor& actor, const DoubleCritic& c, std::span<const Transition> batch,
                    nn::AdamState& opt, Rng& rng);

}  // namespace gdmopt::d2sac
