#pragma once

#include <memory>

#include "gdmopt/envs/bandit_env.hpp"

namespace gdmopt::envs {

struct BandwidthEnvConfig {
  std::size_t hops = 3;
  double total_bandwidth = 20.0;  // MHz
  double payload_lo = 1.0;        // Mbit
  double payload_hi = 5.0;
  double snr_db_lo = 5.0;
  double snr_db_hi = 20.0;
  double compute_lo = 0.05;  // s, per processing module
  double compute_hi = 0.2;
  // Deadline = total compute + slack * (fastest feasible transmission time).
  double slack_lo = 1.05;
  double slack_hi = 1.6;
  double penalty = -100.0;
  double grid_step = 0.005;  // share resolution of the grid oracle
  double encode_floor = 1e-3;
};

// Named view of the state [payload (H) ; snr (H, linear) ; compute (H) ; deadline].
struct BandwidthState {
  Vec payload;
  Vec snr;
  Vec compute;
  double deadline = 0.0;

  static BandwidthState from(const Vec& state, std::size_t hops);
  Vec to_vec() const;
};

// Bandwidth split across the hops of a multi-hop semantic pipeline. Hop h
// carries payload S_h at rate R_h = W_h log2(1 + snr_h). Reward: sum_h ln R_h
// when compute plus transmission time meets the deadline, else `penalty`.
class BandwidthEnv final : public BanditEnv {
 public:
  explicit BandwidthEnv(BandwidthEnvConfig cfg = {});

  const BandwidthEnvConfig& config() const { return cfg_; }

  Vec rates(const BandwidthState& s, const Vec& bandwidth) const;
  double total_time(const BandwidthState& s, const Vec& bandwidth) const;
  bool meets_deadline(const Vec& state, const Vec& bandwidth) const;
  // Smallest achievable transmission time: W_h proportional to sqrt(S_h / log2(1 + snr_h)).
  double min_transmission_time(const BandwidthState& s) const;

  std::string_view name() const override { return "bandwidth"; }
  std::size_t state_dim() const override { return 3 * cfg_.hops + 1; }
  std::size_t solution_dim() const override { return cfg_.hops; }

  Vec sample_state(Rng& rng) const override;
  Vec condition(const Vec& state) const override;
  Vec squash(const Vec& logits, const Vec& state) const override;
  Vec squash_vjp(const Vec& logits, const Vec& state, const Vec& upstream) const override;
  Vec solution_scale(const Vec& state) const override;
  double evaluate(const Vec& state, const Vec& solution) const override;
  // Best point of the grid_step simplex grid with every share at least one step.
  std::optional<OracleSolution> oracle(const Vec& state) const override;
  Vec encode(const Vec& solution, const Vec& state) const override;
  Vec random_solution(const Vec& state, Rng& rng) const override;

 private:
  BandwidthEnvConfig cfg_;
};

std::unique_ptr<BandwidthEnv> bandwidth_env(BandwidthEnvConfig cfg = {});

}  // namespace gdmopt::envs
