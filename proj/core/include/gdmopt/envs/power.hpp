#pragma once

#include <memory>
#include <span>

#include "gdmopt/envs/bandit_env.hpp"

namespace gdmopt::envs {

struct WaterFillingResult {
  Vec allocation;
  double rate = 0.0;
  double water_level = 0.0;
  std::size_t active_channels = 0;
};

// Optimal sum-rate allocation over orthogonal channels with unit noise floor:
// p_m = max(0, mu - 1/g_m), with mu found by dropping the weakest channel
// until every remaining channel gets non-negative power.
WaterFillingResult water_filling(const Vec& gains, double total_power);

// Sum_m log2(1 + g_m p_m).
double sum_rate(const Vec& gains, const Vec& allocation);

struct PowerEnvConfig {
  std::size_t channels = 3;
  double gain_min = 0.5;
  double gain_max = 2.5;
  double total_power = 10.0;
  // Share floor used when encoding expert allocations as logits.
  double encode_floor = 1e-2;
  // When non-empty, every sampled state equals these gains.
  Vec fixed_gains;
};

// Sum-rate power allocation. State: channel gains; solution: per-channel
// power, total_power * softmax(logits).
class PowerEnv final : public BanditEnv {
 public:
  explicit PowerEnv(PowerEnvConfig cfg);

  const PowerEnvConfig& config() const { return cfg_; }

  std::string_view name() const override { return "power"; }
  std::size_t state_dim() const override { return cfg_.channels; }
  std::size_t solution_dim() const override { return cfg_.channels; }

  Vec sample_state(Rng& rng) const override;
  Vec squash(const Vec& logits, const Vec& state) const override;
  Vec squash_vjp(const Vec& logits, const Vec& state, const Vec& upstream) const override;
  Vec solution_scale(const Vec& state) const override;
  double evaluate(const Vec& state, const Vec& solution) const override;
  std::optional<OracleSolution> oracle(const Vec& state) const override;
  Vec encode(const Vec& solution, const Vec& state) const override;
  Vec random_solution(const Vec& state, Rng& rng) const override;

 private:
  PowerEnvConfig cfg_;
};

std::unique_ptr<PowerEnv> power_env(std::size_t channels, double gain_min, double gain_max, double total_power);

}  // namespace gdmopt::envs
