#include "gdmopt/envs/bandit_env.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

Vec BanditEnv::solution_scale(const Vec& /*state*/) const {
  return Vec::Ones(static_cast<Eigen::Index>(solution_dim()));
}

Vec BanditEnv::average_solution(const Vec& state) const {
  return squash(Vec::Zero(static_cast<Eigen::Index>(solution_dim())), state);
}

Vec clamp_logits(const Vec& logits) { return logits.cwiseMax(-kLogitClamp).cwiseMin(kLogitClamp); }

Vec execute(const BanditEnv& env, const Vec& logits, const Vec& state) {
  if (static_cast<std::size_t>(logits.size()) != env.solution_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "logit vector length != solution dim");
  }
  if (!logits.allFinite()) throw Error(ErrorCode::kNonFinite, "chain output is not finite");
  return env.squash(clamp_logits(logits), state);
}

Vec execute_vjp(const BanditEnv& env, const Vec& logits, const Vec& state, const Vec& upstream) {
  Vec g = env.squash_vjp(clamp_logits(logits), state, upstream);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(logits(i)) > kLogitClamp) g(i) = 0.0;
  }
  return g;
}

Vec simplex_squash(const Vec& logits, double budget) {
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp().matrix();
  return budget * e / e.sum();
}

Vec simplex_squash_vjp(const Vec& logits, double budget, const Vec& upstream) {
  const Vec s = simplex_squash(logits, 1.0);
  return budget * s.cwiseProduct((upstream.array() - s.dot(upstream)).matrix());
}

Vec simplex_encode(const Vec& solution, double budget, double floor) {
  Vec share = (solution / budget).cwiseMax(floor);
  Vec logits = share.array().log().matrix();
  logits.array() -= logits.mean();
  return logits;
}

Vec simplex_random(std::size_t dim, double budget, Rng& rng) {
  // Normalized i.i.d. exponentials are uniform on the simplex.
  Vec e(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = -std::log1p(-rng.uniform01());
  if (!(e.sum() > 0.0)) e.setOnes();
  return budget * e / e.sum();
}

}  // namespace gdmopt::envs
