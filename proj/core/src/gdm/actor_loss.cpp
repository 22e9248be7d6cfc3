#include "gdmopt/gdm/actor_loss.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::gdm {

ActorLossResult actor_loss(const diffusion::ConditionalDenoiser& d, const diffusion::NoiseSchedule& s,
                           const SolutionValue& q, const envs::BanditEnv& env, std::span<const Vec> states,
                           const diffusion::ChainNoise& noise) {
  if (states.empty()) throw Error(ErrorCode::kEmptyBatch, "actor_loss needs a non-empty batch");
  const auto B = static_cast<Eigen::Index>(states.size());
  const auto D = static_cast<Eigen::Index>(d.solution_dim());

  Mat cond(static_cast<Eigen::Index>(d.condition_dim()), B);
  for (Eigen::Index b = 0; b < B; ++b) cond.col(b) = env.condition(states[static_cast<std::size_t>(b)]);

  diffusion::ChainTrace trace;
  ActorLossResult out;
  out.logits = diffusion::run_chain(d, s, cond, noise, &trace);
  if (!out.logits.allFinite()) throw Error(ErrorCode::kNonFinite, "chain output is not finite");

  Mat scaled(D, B);
  Mat scale(D, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const Vec& st = states[static_cast<std::size_t>(b)];
    scale.col(b) = env.solution_scale(st);
    scaled.col(b) = envs::execute(env, out.logits.col(b), st).cwiseQuotient(scale.col(b));
  }

  const ValueAndGrad vg = q.value_and_grad(cond, scaled);
  out.loss = -vg.value.mean();
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::kNonFinite, "actor loss is not finite");

  Mat grad_x0(D, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const Vec upstream = (-1.0 / static_cast<double>(B)) * vg.solution_grad.col(b).cwiseQuotient(scale.col(b));
    grad_x0.col(b) = envs::execute_vjp(env, out.logits.col(b), states[static_cast<std::size_t>(b)], upstream);
  }
  out.grads = nn::GradSet::zeros_like(d.net());
  diffusion::chain_backward(d, s, trace, grad_x0, out.grads);
  return out;
}

ActorLossResult actor_loss(const diffusion::ConditionalDenoiser& d, const diffusion::NoiseSchedule& s,
                           const SolutionValue& q, const envs::BanditEnv& env, std::span<const Vec> states,
                           Rng& rng) {
  const auto noise = diffusion::draw_chain_noise(d.solution_dim(), states.size(), s.steps(), rng);
  return actor_loss(d, s, q, env, states, noise);
}

}  // namespace gdmopt::gdm
