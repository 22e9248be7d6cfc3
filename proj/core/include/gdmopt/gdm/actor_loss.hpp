#pragma once

#include <span>

#include "gdmopt/diffusion/chain.hpp"
#include "gdmopt/envs/bandit_env.hpp"
#include "gdmopt/gdm/evaluator.hpp"

namespace gdmopt::gdm {

struct ActorLossResult {
  double loss = 0.0;
  nn::GradSet grads;  // with respect to the denoiser weights only
  Mat logits;         // chain outputs, D x B
};

// -mean_b Q(g_b, squash(chain(g_b)) / scale_b) with the gradient carried back
// through the squash and every reverse step. `states` are raw env states; the
// scorer sees env.condition(state) and the scaled solution.
ActorLossResult actor_loss(const diffusion::ConditionalDenoiser& d, const diffusion::NoiseSchedule& s,
                           const SolutionValue& q, const envs::BanditEnv& env, std::span<const Vec> states,
                           const diffusion::ChainNoise& noise);
ActorLossResult actor_loss(const diffusion::ConditionalDenoiser& d, const diffusion::NoiseSchedule& s,
                           const SolutionValue& q, const envs::BanditEnv& env, std::span<const Vec> states,
                           Rng& rng);

}  // namespace gdmopt::gdm
