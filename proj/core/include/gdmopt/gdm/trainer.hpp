#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gdmopt/diffusion/chain.hpp"
#include "gdmopt/diffusion/expert_loss.hpp"
#include "gdmopt/envs/bandit_env.hpp"
#include "gdmopt/gdm/evaluator.hpp"
#include "gdmopt/metrics.hpp"

namespace gdmopt::gdm {

struct GdmTrainConfig {
  std::int64_t epochs = 3000;
  std::size_t batch = 64;
  double actor_lr = 1e-3;
  double critic_lr = 3e-4;
  // The critic regresses reward_scale * reward. Adam moves each weight by
  // about one learning rate per step, so rewards in the hundreds (constraint
  // penalties) take thousands of epochs to fit at scale 1; the actor is
  // unaffected apart from the units of its loss.
  double reward_scale = 1.0;

  int steps = 9;
  diffusion::ScheduleKind schedule = diffusion::ScheduleKind::kVariancePreserving;
  double beta_min = 0.1;
  double beta_max = 2.0;

  std::vector<std::size_t> actor_hidden = {64, 64};
  std::vector<std::size_t> critic_hidden = {64, 64};
  nn::Activation activation = nn::Activation::kTanh;

  double sigma = 0.1;
  double sigma_decay = 0.999;
  double sigma_floor = 0.01;

  std::size_t buffer_capacity = 10000;
  int critic_updates = 1;  // per epoch
  int actor_updates = 1;   // per epoch
  // Critic-only epochs before the first actor update; without them the actor
  // climbs an untrained critic and can saturate into a penalty plateau.
  std::int64_t actor_delay = 0;

  std::int64_t eval_every = 10;
  std::size_t eval_states = 32;
  std::size_t eval_threads = 1;
  bool record_wall_clock = false;

  void validate() const;
};

struct GdmModel {
  diffusion::ConditionalDenoiser denoiser;
  diffusion::NoiseSchedule schedule;
  std::optional<SolutionEvaluator> evaluator;  // absent for expert-trained models
};

GdmModel make_gdm_model(const envs::BanditEnv& env, const GdmTrainConfig& cfg, Rng& rng);

struct InferResult {
  Vec logits;
  Vec solution;
  double reward = 0.0;
};

// One chain draw without exploration noise, squashed and scored.
InferResult infer(const GdmModel& model, const envs::BanditEnv& env, const Vec& state, Rng& rng);

struct EvalSummary {
  std::size_t count = 0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  std::optional<double> gap_mean;    // oracle reward - achieved reward
  std::optional<double> oracle_mean;
  std::vector<double> rewards;
  std::vector<double> oracle_rewards;
};

// A fixed evaluation set with its oracle values computed once.
struct EvalSet {
  std::vector<Vec> states;
  std::vector<std::optional<envs::OracleSolution>> oracle;

  static EvalSet draw(const envs::BanditEnv& env, std::size_t count, Rng& rng, std::size_t threads = 1);
};

// State i is solved with chain stream rng.split(i), so results do not depend
// on `threads`.
EvalSummary evaluate_policy(const GdmModel& model, const envs::BanditEnv& env, const EvalSet& set, const Rng& rng,
                            std::size_t threads = 1);

struct GdmHooks {
  // Called after each evaluation row is appended.
  std::function<void(const MetricsRow&, const GdmModel&)> on_eval;
};

struct GdmTrainResult {
  GdmModel model;
  std::vector<MetricsRow> metrics;
};

// Expert-free training: the denoiser climbs a jointly learned evaluator.
GdmTrainResult train_online(const envs::BanditEnv& env, const GdmTrainConfig& cfg, Rng& rng,
                            const GdmHooks& hooks = {});

// Conditions paired with the logit encoding of each state's oracle solution.
std::vector<diffusion::ExpertExample> make_expert_dataset(const envs::BanditEnv& env, std::size_t count, Rng& rng);

// Noise-prediction training on an expert dataset. The actor_loss column
// carries the expert loss.
GdmTrainResult train_expert(const envs::BanditEnv& env, std::span<const diffusion::ExpertExample> dataset,
                            const GdmTrainConfig& cfg, Rng& rng, const GdmHooks& hooks = {});

}  // namespace gdmopt::gdm
