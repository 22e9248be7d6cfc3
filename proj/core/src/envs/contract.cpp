#include "gdmopt/envs/contract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

ContractState ContractState::from(const Vec& state) {
  if (state.size() != 6) throw Error(ErrorCode::kDimensionMismatch, "contract state has 6 entries");
  ContractState s;
  s.users = state(0);
  s.latency_max = state(1);
  s.proportion = {state(2), state(3)};
  s.complexity = {state(4), state(5)};
  if (!(s.latency_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "contract state needs L_max > 0");
  if (!(s.complexity[0] > 0.0 && s.complexity[1] > s.complexity[0])) {
    throw Error(ErrorCode::kInvalidArgument, "contract state needs theta2 > theta1 > 0");
  }
  if (std::abs(s.proportion[0] + s.proportion[1] - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "contract state needs p1 + p2 = 1");
  }
  return s;
}

Vec ContractState::to_vec() const {
  Vec v(6);
  v << users, latency_max, proportion[0], proportion[1], complexity[0], complexity[1];
  return v;
}

ContractEnv::ContractEnv(ContractEnvConfig cfg) : cfg_(cfg) {
  if (!(cfg_.latency_floor > 0.0 && cfg_.latency_floor < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "contract latency floor must lie in (0, 1)");
  }
  if (!(cfg_.reward_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "contract reward_max must be positive");
  if (cfg_.grid_points < 2) throw Error(ErrorCode::kInvalidArgument, "contract oracle grid needs >= 2 points");
  if (!(cfg_.complexity1_lo > 0.0) || !(cfg_.complexity_gap_lo > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "contract complexity ranges must be positive");
  }
}

double ContractEnv::user_utility(const ContractState& s, int level, double latency, double payment) const {
  const double theta = s.complexity[static_cast<std::size_t>(level)];
  return cfg_.alpha1 * std::pow(theta, cfg_.beta1) - cfg_.alpha2 * std::pow(latency / s.latency_max, cfg_.beta2) -
         payment;
}

double ContractEnv::provider_utility(const ContractState& s, int level, double latency, double payment) const {
  const double theta = s.complexity[static_cast<std::size_t>(level)];
  return payment - (s.latency_max - latency) / latency * theta;
}

ContractCheck ContractEnv::check(const Vec& state, const Vec& solution) const {
  if (solution.size() != 4) throw Error(ErrorCode::kDimensionMismatch, "contract solution has 4 entries");
  const ContractState s = ContractState::from(state);
  ContractCheck c;
  for (int z = 0; z < 2; ++z) {
    const int other = 1 - z;
    const double own = provider_utility(s, z, solution(2 * z), solution(2 * z + 1));
    const double alt = provider_utility(s, z, solution(2 * other), solution(2 * other + 1));
    c.individually_rational[static_cast<std::size_t>(z)] = own >= cfg_.utility_threshold;
    c.incentive_compatible[static_cast<std::size_t>(z)] = own >= alt;
  }
  return c;
}

Vec ContractEnv::sample_state(Rng& rng) const {
  ContractState s;
  s.users = rng.uniform(cfg_.users_min, cfg_.users_max);
  s.latency_max = rng.uniform(cfg_.latency_max_lo, cfg_.latency_max_hi);
  const double p1 = rng.uniform(cfg_.proportion_lo, cfg_.proportion_hi);
  s.proportion = {p1, 1.0 - p1};
  const double theta1 = rng.uniform(cfg_.complexity1_lo, cfg_.complexity1_hi);
  s.complexity = {theta1, theta1 + rng.uniform(cfg_.complexity_gap_lo, cfg_.complexity_gap_hi)};
  return s.to_vec();
}

Vec ContractEnv::condition(const Vec& state) const {
  const ContractState s = ContractState::from(state);
  const double theta_scale = cfg_.complexity1_hi + cfg_.complexity_gap_hi;
  Vec c(6);
  c << s.users / cfg_.users_max, s.latency_max / cfg_.latency_max_hi, s.proportion[0], s.proportion[1],
      s.complexity[0] / theta_scale, s.complexity[1] / theta_scale;
  return c;
}

std::array<double, 4> ContractEnv::lower(const ContractState& s) const {
  const double l = cfg_.latency_floor * s.latency_max;
  return {l, 0.0, l, 0.0};
}

std::array<double, 4> ContractEnv::upper(const ContractState& s) const {
  return {s.latency_max, cfg_.reward_max, s.latency_max, cfg_.reward_max};
}

// lo + (hi - lo) * (tanh(x) + 1) / 2 per coordinate.
Vec ContractEnv::squash(const Vec& logits, const Vec& state) const {
  const ContractState s = ContractState::from(state);
  const auto lo = lower(s);
  const auto hi = upper(s);
  Vec p(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const auto k = static_cast<std::size_t>(i);
    p(i) = lo[k] + (hi[k] - lo[k]) * 0.5 * (std::tanh(logits(i)) + 1.0);
  }
  return p;
}

Vec ContractEnv::squash_vjp(const Vec& logits, const Vec& state, const Vec& upstream) const {
  const ContractState s = ContractState::from(state);
  const auto lo = lower(s);
  const auto hi = upper(s);
  Vec g(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double th = std::tanh(logits(i));
    g(i) = upstream(i) * (hi[k] - lo[k]) * 0.5 * (1.0 - th * th);
  }
  return g;
}

Vec ContractEnv::solution_scale(const Vec& state) const {
  const ContractState s = ContractState::from(state);
  Vec scale(4);
  scale << s.latency_max, cfg_.reward_max, s.latency_max, cfg_.reward_max;
  return scale;
}

double ContractEnv::evaluate(const Vec& state, const Vec& solution) const {
  if (!check(state, solution).feasible()) return cfg_.penalty;
  const ContractState s = ContractState::from(state);
  double total = 0.0;
  for (int z = 0; z < 2; ++z) {
    total += s.proportion[static_cast<std::size_t>(z)] * user_utility(s, z, solution(2 * z), solution(2 * z + 1));
  }
  return total;
}

std::optional<OracleSolution> ContractEnv::oracle(const Vec& state) const {
  const ContractState s = ContractState::from(state);
  const auto lo = lower(s);
  const auto hi = upper(s);
  const std::size_t n = cfg_.grid_points;
  auto axis = [&](std::size_t k, std::size_t i) {
    return lo[k] + (hi[k] - lo[k]) * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  OracleSolution best{Vec(4), -std::numeric_limits<double>::infinity()};
  Vec p(4);
  for (std::size_t a = 0; a < n; ++a) {
    p(0) = axis(0, a);
    for (std::size_t b = 0; b < n; ++b) {
      p(1) = axis(1, b);
      // Level-1 IR depends only on (L1, R1).
      if (provider_utility(s, 0, p(0), p(1)) < cfg_.utility_threshold) continue;
      for (std::size_t c = 0; c < n; ++c) {
        p(2) = axis(2, c);
        for (std::size_t d = 0; d < n; ++d) {
          p(3) = axis(3, d);
          const double r = evaluate(state, p);
          if (r > best.reward && check(state, p).feasible()) {
            best.reward = r;
            best.solution = p;
          }
        }
      }
    }
  }
  return best;
}

Vec ContractEnv::encode(const Vec& solution, const Vec& state) const {
  const ContractState s = ContractState::from(state);
  const auto lo = lower(s);
  const auto hi = upper(s);
  Vec x(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double u = std::clamp(2.0 * (solution(i) - lo[k]) / (hi[k] - lo[k]) - 1.0, -1.0 + 1e-9, 1.0 - 1e-9);
    x(i) = std::atanh(u);
  }
  return clamp_logits(x);
}

Vec ContractEnv::random_solution(const Vec& state, Rng& rng) const {
  const ContractState s = ContractState::from(state);
  const auto lo = lower(s);
  const auto hi = upper(s);
  Vec p(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const auto k = static_cast<std::size_t>(i);
    p(i) = rng.uniform(lo[k], hi[k]);
  }
  return p;
}

std::unique_ptr<ContractEnv> contract_env(ContractEnvConfig cfg) { return std::make_unique<ContractEnv>(cfg); }

}  // namespace gdmopt::envs
