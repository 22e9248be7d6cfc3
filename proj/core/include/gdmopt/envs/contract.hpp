#pragma once

#include <array>
#include <memory>

#include "gdmopt/envs/bandit_env.hpp"

namespace gdmopt::envs {

struct ContractEnvConfig {
  // Utility weights of the complexity-latency metric.
  double alpha1 = 30.0;
  double alpha2 = 5.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double utility_threshold = 0.0;  // IR lower bound on provider utility
  double penalty = -100.0;         // reward for any violated IR/IC constraint

  // Solution box: L in [latency_floor * L_max, L_max], R in [0, reward_max].
  double latency_floor = 0.1;
  double reward_max = 50.0;

  // State sampling ranges.
  double users_min = 1.0;
  double users_max = 10.0;
  double latency_max_lo = 5.0;
  double latency_max_hi = 15.0;
  double proportion_lo = 0.2;
  double proportion_hi = 0.8;
  double complexity1_lo = 0.2;
  double complexity1_hi = 1.0;
  double complexity_gap_lo = 0.2;
  double complexity_gap_hi = 1.0;

  std::size_t grid_points = 20;  // per solution axis for the grid oracle
};

// Named view of the 6-entry state [n, L_max, p1, p2, theta1, theta2].
struct ContractState {
  double users = 0.0;  // n; carried as a feature, not used by the utilities
  double latency_max = 0.0;
  std::array<double, 2> proportion{};
  std::array<double, 2> complexity{};

  static ContractState from(const Vec& state);
  Vec to_vec() const;
};

struct ContractCheck {
  std::array<bool, 2> individually_rational{};
  std::array<bool, 2> incentive_compatible{};
  bool feasible() const {
    return individually_rational[0] && individually_rational[1] && incentive_compatible[0] && incentive_compatible[1];
  }
};

// Two-level contract design. Solution (L1, R1, L2, R2): a latency requirement
// and a payment for each provider level. Reward is the proportion-weighted
// user utility when every IR and IC constraint holds, else `penalty`.
class ContractEnv final : public BanditEnv {
 public:
  explicit ContractEnv(ContractEnvConfig cfg = {});

  const ContractEnvConfig& config() const { return cfg_; }

  // alpha1 theta^beta1 - alpha2 (L / L_max)^beta2 - R
  double user_utility(const ContractState& s, int level, double latency, double payment) const;
  // R - (L_max - L) / L * theta, evaluated for a provider of `level`
  double provider_utility(const ContractState& s, int level, double latency, double payment) const;
  ContractCheck check(const Vec& state, const Vec& solution) const;

  std::string_view name() const override { return "contract"; }
  std::size_t state_dim() const override { return 6; }
  std::size_t solution_dim() const override { return 4; }

  Vec sample_state(Rng& rng) const override;
  Vec condition(const Vec& state) const override;
  Vec squash(const Vec& logits, const Vec& state) const override;
  Vec squash_vjp(const Vec& logits, const Vec& state, const Vec& upstream) const override;
  Vec solution_scale(const Vec& state) const override;
  double evaluate(const Vec& state, const Vec& solution) const override;
  // Best feasible point of a grid_points^4 grid over the solution box.
  std::optional<OracleSolution> oracle(const Vec& state) const override;
  Vec encode(const Vec& solution, const Vec& state) const override;
  Vec random_solution(const Vec& state, Rng& rng) const override;

 private:
  std::array<double, 4> lower(const ContractState& s) const;
  std::array<double, 4> upper(const ContractState& s) const;

  ContractEnvConfig cfg_;
};

std::unique_ptr<ContractEnv> contract_env(ContractEnvConfig cfg = {});

}  // namespace gdmopt::envs
