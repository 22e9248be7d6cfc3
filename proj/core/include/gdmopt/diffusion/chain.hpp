#pragma once

#include <vector>

#include "gdmopt/diffusion/denoiser.hpp"
#include "gdmopt/diffusion/schedule.hpp"
#include "gdmopt/nn/mlp.hpp"
#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::diffusion {

// Closed-form forward noising: sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.
Vec forward_sample(const NoiseSchedule& s, const Vec& x0, int t, const Vec& noise);

// One reverse step:
//   x_{t-1} = x_t / sqrt(a_t) - b_t / sqrt(a_t (1 - abar_t)) * eps(x_t, t, g) + sqrt(b_t) * noise
// Callers pass zero noise at t = 1.
Vec reverse_step(const ConditionalDenoiser& d, const NoiseSchedule& s, const Vec& x_t, int t, const Vec& g,
                 const Vec& noise);

// Every Gaussian draw a reverse chain consumes over a batch. `initial` is x_T;
// `step[t - 1]` is the noise injected at step t (step[0] is always zero).
struct ChainNoise {
  Mat initial;
  std::vector<Mat> step;
};

ChainNoise draw_chain_noise(std::size_t dim, std::size_t batch, int steps, Rng& rng);
// x_T = 0 and no injected noise: the deterministic mean path.
ChainNoise zero_chain_noise(std::size_t dim, std::size_t batch, int steps);

struct ChainTrace {
  std::vector<nn::ForwardTape> tapes;  // tapes[t - 1] records the denoiser call at step t
};

// Runs t = T..1 over a batch (one condition per column) and returns x_0, the
// pre-squash chain output. With a trace, every denoiser call is recorded for
// chain_backward.
Mat run_chain(const ConditionalDenoiser& d, const NoiseSchedule& s, const Mat& conditions, const ChainNoise& noise,
              ChainTrace* trace = nullptr);

Mat sample_chain(const ConditionalDenoiser& d, const NoiseSchedule& s, const Mat& conditions, Rng& rng);
Vec sample_chain(const ConditionalDenoiser& d, const NoiseSchedule& s, const Vec& condition, Rng& rng);

// Reverse-mode pass through a recorded chain: given dL/dx_0 it accumulates
// dL/dtheta into `grads` and returns dL/dx_T.
Mat chain_backward(const ConditionalDenoiser& d, const NoiseSchedule& s, const ChainTrace& trace, const Mat& grad_x0,
                   nn::GradSet& grads);

}  // namespace gdmopt::diffusion
