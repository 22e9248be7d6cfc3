#pragma once

#include <memory>
#include <vector>

#include "gdmopt/envs/mdp_env.hpp"

namespace gdmopt::envs {

struct ProviderTask {
  double size = 1.0;
  int duration = 1;  // steps the task occupies its provider, including the assignment step
};

struct ProviderEnvConfig {
  std::vector<double> capacities = {3.0, 6.0, 6.0};
  std::vector<double> qualities = {3.0, 1.0, 1.0};
  int horizon = 20;
  double task_lo = 0.5;
  double task_hi = 3.0;
  int duration_lo = 1;
  int duration_hi = 3;
  double crash_penalty = 5.0;
  // When non-empty, tasks are served from this list in order instead of being
  // drawn; it must hold at least `horizon` entries.
  std::vector<ProviderTask> tasks;
};

// Assigns a stream of generation tasks to K service providers. Assigning task
// s to provider k with running load L returns q_k log(1 + s / (1 + L)). If
// L + s exceeds the provider's capacity it crashes: reward -crash_penalty, its
// running tasks are dropped and the task is offered again on the next step.
//
// State: [residual_k / capacity_k (K) ; task size / task_hi ; steps left / horizon].
class ProviderEnv final : public MdpEnv {
 public:
  explicit ProviderEnv(ProviderEnvConfig cfg);

  const ProviderEnvConfig& config() const { return cfg_; }

  std::string_view name() const override { return "provider"; }
  std::size_t state_dim() const override { return cfg_.capacities.size() + 2; }
  std::size_t num_actions() const override { return cfg_.capacities.size(); }

  Vec reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;
  std::unique_ptr<MdpEnv> clone() const override { return std::make_unique<ProviderEnv>(*this); }

  double load(std::size_t k) const;
  const ProviderTask& current_task() const { return task_; }
  // Reward `step(action)` would return, without changing the env.
  double immediate_reward(int action) const;

 private:
  struct Running {
    double size;
    int remaining;
  };

  ProviderTask draw_task(Rng& rng);
  Vec observe() const;

  ProviderEnvConfig cfg_;
  std::vector<std::vector<Running>> running_;
  ProviderTask task_;
  std::size_t next_task_ = 0;
  int t_ = 0;
  bool done_ = true;
};

std::unique_ptr<ProviderEnv> provider_env(std::size_t providers, std::vector<double> capacities,
                                          std::vector<double> qualities, int horizon);

}  // namespace gdmopt::envs
