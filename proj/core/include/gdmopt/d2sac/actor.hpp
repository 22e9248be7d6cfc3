#pragma once

#include <span>

#include "gdmopt/diffusion/chain.hpp"
#include "gdmopt/rng.hpp"

namespace gdmopt::d2sac {

enum class ActMode { kSample, kGreedy };

Vec softmax(const Vec& z);
Mat softmax_columns(const Mat& z);
// -sum p log p, with 0 log 0 = 0.
double entropy(const Vec& probs);

// Diffusion policy over a discrete action set: the reverse chain emits A
// logits conditioned on the state, and pi = softmax(logits / temperature).
class DiffusionActor {
 public:
  DiffusionActor(diffusion::ConditionalDenoiser denoiser, diffusion::NoiseSchedule schedule, double temperature = 1.0);

  static DiffusionActor create(std::size_t state_dim, std::size_t actions, int steps,
                               std::span<const std::size_t> hidden, nn::Activation activation,
                               diffusion::ScheduleKind kind, double beta_min, double beta_max, Rng& rng,
                               double temperature = 1.0);

  std::size_t state_dim() const { return denoiser_.condition_dim(); }
  std::size_t actions() const { return denoiser_.solution_dim(); }
  double temperature() const { return temperature_; }
  const diffusion::ConditionalDenoiser& denoiser() const { return denoiser_; }
  diffusion::ConditionalDenoiser& mutable_denoiser() { return denoiser_; }
  const diffusion::NoiseSchedule& schedule() const { return schedule_; }

  // Chain output, A x B, one state per column.
  Mat logits(const Mat& states, const diffusion::ChainNoise& noise, diffusion::ChainTrace* trace = nullptr) const;
  // pi(. | s) per column from one stochastic chain draw.
  Mat probabilities(const Mat& states, Rng& rng) const;
  // pi(. | s) along the noise-free chain (x_T = 0, no injected noise).
  Vec mean_probabilities(const Vec& state) const;

  // kSample draws from pi(. | s) of a stochastic chain; kGreedy is the argmax
  // of the noise-free chain's distribution. Ties go to the lowest index.
  int act(const Vec& state, Rng& rng, ActMode mode) const;

 private:
  diffusion::ConditionalDenoiser denoiser_;
  diffusion::NoiseSchedule schedule_;
  double temperature_;
};

}  // namespace gdmopt::d2sac
