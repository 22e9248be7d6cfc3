#pragma once

#include <span>
#include <vector>

#include "gdmopt/diffusion/denoiser.hpp"
#include "gdmopt/diffusion/schedule.hpp"
#include "gdmopt/nn/mlp.hpp"
#include "gdmopt/rng.hpp"

namespace gdmopt::diffusion {

// A condition paired with the pre-squash encoding of its optimal solution.
struct ExpertExample {
  Vec condition;
  Vec solution;
};

// Step index and target noise per example.
struct ExpertDraws {
  std::vector<int> steps;
  Mat noise;  // D x B
};

ExpertDraws draw_expert(std::size_t batch, std::size_t dim, int steps, Rng& rng);

// mean_b || eps_b - eps_theta(sqrt(abar) x0_b + sqrt(1 - abar) eps_b, t_b, g_b) ||^2
// and its gradient with respect to the denoiser weights.
nn::LossAndGrad expert_loss(const ConditionalDenoiser& d, const NoiseSchedule& s,
                            std::span<const ExpertExample> batch, const ExpertDraws& draws);
nn::LossAndGrad expert_loss(const ConditionalDenoiser& d, const NoiseSchedule& s,
                            std::span<const ExpertExample> batch, Rng& rng);

}  // namespace gdmopt::diffusion
