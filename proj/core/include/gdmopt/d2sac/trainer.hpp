#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gdmopt/d2sac/actor.hpp"
#include "gdmopt/d2sac/critic.hpp"
#include "gdmopt/envs/mdp_env.hpp"
#include "gdmopt/metrics.hpp"

namespace gdmopt::d2sac {

struct D2sacConfig {
  std::int64_t total_steps = 50000;  // environment steps
  std::size_t batch = 128;
  std::size_t buffer_capacity = 50000;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;

  int steps = 5;  // actor denoising steps
  diffusion::ScheduleKind schedule = diffusion::ScheduleKind::kVariancePreserving;
  double beta_min = 0.1;
  double beta_max = 10.0;
  double temperature = 1.0;

  std::vector<std::size_t> actor_hidden = {64, 64};
  std::vector<std::size_t> critic_hidden = {64, 64};
  nn::Activation activation = nn::Activation::kTanh;

  CriticConfig critic;

  std::int64_t warmup_steps = 1000;  // uniform random actions before learning starts
  int update_every = 1;              // env steps between learner rounds
  int updates_per_round = 1;

  std::int64_t eval_every = 5000;
  std::size_t eval_episodes = 10;
  bool keep_best = true;  // return the policy with the best evaluation
  bool record_wall_clock = false;

  void validate() const;
};

struct D2sacModel {
  DiffusionActor actor;
  DoubleCritic critic;
};

D2sacModel make_d2sac_model(const envs::MdpEnv& env, const D2sacConfig& cfg, Rng& rng);

struct EpisodeSummary {
  std::size_t episodes = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  std::vector<double> returns;
};

// Greedy-mode episodes; episode i resets from rng.split(i).
EpisodeSummary evaluate_greedy(const DiffusionActor& actor, const envs::MdpEnv& env, std::size_t episodes,
                               const Rng& rng);
EpisodeSummary evaluate_policy(const envs::Policy& policy, const envs::MdpEnv& env, std::size_t episodes,
                               const Rng& rng);

struct D2sacHooks {
  std::function<void(const MetricsRow&, const D2sacModel&)> on_eval;
};

struct D2sacTrainResult {
  D2sacModel model;  // best-evaluated when keep_best, else final
  std::vector<MetricsRow> metrics;
  std::int64_t best_epoch = 0;
};

// Rows use the environment step count as their epoch.
D2sacTrainResult train_mdp(const envs::MdpEnv& env, const D2sacConfig& cfg, Rng& rng, const D2sacHooks& hooks = {});

}  // namespace gdmopt::d2sac
