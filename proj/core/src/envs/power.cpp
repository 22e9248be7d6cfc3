#include "gdmopt/envs/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

WaterFillingResult water_filling(const Vec& gains, double total_power) {
  const auto M = gains.size();
  if (M == 0) throw Error(ErrorCode::kInvalidArgument, "water_filling needs at least one channel");
  if (!(total_power > 0.0)) throw Error(ErrorCode::kInvalidArgument, "water_filling needs positive power");
  if (!(gains.array() > 0.0).all() || !gains.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "water_filling needs finite positive gains");
  }

  // Channels ordered strongest first (smallest inverse gain).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(M));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });

  double inv_sum = 0.0;
  for (Eigen::Index i : order) inv_sum += 1.0 / gains(i);

  WaterFillingResult r;
  std::size_t active = order.size();
  double mu = 0.0;
  while (true) {
    mu = (total_power + inv_sum) / static_cast<double>(active);
    const double weakest_inv = 1.0 / gains(order[active - 1]);
    if (mu >= weakest_inv || active == 1) break;
    inv_sum -= weakest_inv;
    --active;
  }

  r.allocation = Vec::Zero(M);
  for (std::size_t k = 0; k < active; ++k) {
    const Eigen::Index i = order[k];
    r.allocation(i) = std::max(0.0, mu - 1.0 / gains(i));
  }
  r.water_level = mu;
  r.active_channels = active;
  r.rate = sum_rate(gains, r.allocation);
  return r;
}

double sum_rate(const Vec& gains, const Vec& allocation) {
  if (gains.size() != allocation.size()) throw Error(ErrorCode::kDimensionMismatch, "gains/allocation length");
  return (1.0 + gains.array() * allocation.array()).log2().sum();
}

PowerEnv::PowerEnv(PowerEnvConfig cfg) : cfg_(cfg) {
  if (cfg_.channels < 1) throw Error(ErrorCode::kInvalidArgument, "power env needs M >= 1");
  if (!(cfg_.gain_min > 0.0) || !(cfg_.gain_max >= cfg_.gain_min)) {
    throw Error(ErrorCode::kInvalidArgument, "power env needs 0 < gain_min <= gain_max");
  }
  if (!(cfg_.total_power > 0.0)) throw Error(ErrorCode::kInvalidArgument, "power env needs positive total power");
  if (cfg_.fixed_gains.size() != 0) {
    if (static_cast<std::size_t>(cfg_.fixed_gains.size()) != cfg_.channels) {
      throw Error(ErrorCode::kInvalidArgument, "power env fixed gains must have one entry per channel");
    }
    if (!(cfg_.fixed_gains.array() > 0.0).all() || !cfg_.fixed_gains.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "power env fixed gains must be finite and positive");
    }
  }
}

Vec PowerEnv::sample_state(Rng& rng) const {
  if (cfg_.fixed_gains.size() != 0) return cfg_.fixed_gains;
  Vec g(static_cast<Eigen::Index>(cfg_.channels));
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.uniform(cfg_.gain_min, cfg_.gain_max);
  return g;
}

Vec PowerEnv::squash(const Vec& logits, const Vec& /*state*/) const {
  return simplex_squash(logits, cfg_.total_power);
}

Vec PowerEnv::squash_vjp(const Vec& logits, const Vec& /*state*/, const Vec& upstream) const {
  return simplex_squash_vjp(logits, cfg_.total_power, upstream);
}

Vec PowerEnv::solution_scale(const Vec& /*state*/) const {
  return Vec::Constant(static_cast<Eigen::Index>(cfg_.channels), cfg_.total_power);
}

double PowerEnv::evaluate(const Vec& state, const Vec& solution) const { return sum_rate(state, solution); }

std::optional<OracleSolution> PowerEnv::oracle(const Vec& state) const {
  WaterFillingResult wf = water_filling(state, cfg_.total_power);
  return OracleSolution{std::move(wf.allocation), wf.rate};
}

Vec PowerEnv::encode(const Vec& solution, const Vec& /*state*/) const {
  return simplex_encode(solution, cfg_.total_power, cfg_.encode_floor);
}

Vec PowerEnv::random_solution(const Vec& /*state*/, Rng& rng) const {
  return simplex_random(cfg_.channels, cfg_.total_power, rng);
}

std::unique_ptr<PowerEnv> power_env(std::size_t channels, double gain_min, double gain_max, double total_power) {
  return std::make_unique<PowerEnv>(PowerEnvConfig{channels, gain_min, gain_max, total_power, 1e-2, Vec()});
}

}  // namespace gdmopt::envs
