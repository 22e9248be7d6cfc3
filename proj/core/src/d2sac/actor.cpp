#include "gdmopt/d2sac/actor.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::d2sac {

Vec softmax(const Vec& z) {
  const Vec e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Mat softmax_columns(const Mat& z) {
  Mat p(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) p.col(j) = softmax(z.col(j));
  return p;
}

double entropy(const Vec& probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) > 0.0) h -= probs(i) * std::log(probs(i));
  }
  return h;
}

DiffusionActor::DiffusionActor(diffusion::ConditionalDenoiser denoiser, diffusion::NoiseSchedule schedule,
                               double temperature)
    : denoiser_(std::move(denoiser)), schedule_(std::move(schedule)), temperature_(temperature) {
  if (!(temperature_ > 0.0)) throw Error(ErrorCode::kInvalidArgument, "actor temperature must be positive");
  if (denoiser_.steps() != schedule_.steps()) {
    throw Error(ErrorCode::kDimensionMismatch, "actor denoiser and schedule disagree on T");
  }
}

DiffusionActor DiffusionActor::create(std::size_t state_dim, std::size_t actions, int steps,
                                      std::span<const std::size_t> hidden, nn::Activation activation,
                                      diffusion::ScheduleKind kind, double beta_min, double beta_max, Rng& rng,
                                      double temperature) {
  if (actions < 1) throw Error(ErrorCode::kInvalidArgument, "actor needs at least one action");
  return DiffusionActor(diffusion::ConditionalDenoiser::create(actions, state_dim, steps, hidden, activation, rng),
                        diffusion::NoiseSchedule::make(steps, kind, beta_min, beta_max), temperature);
}

Mat DiffusionActor::logits(const Mat& states, const diffusion::ChainNoise& noise,
                           diffusion::ChainTrace* trace) const {
  Mat z = diffusion::run_chain(denoiser_, schedule_, states, noise, trace);
  if (!z.allFinite()) throw Error(ErrorCode::kNonFinite, "actor logits are not finite");
  return z;
}

Mat DiffusionActor::probabilities(const Mat& states, Rng& rng) const {
  const auto noise =
      diffusion::draw_chain_noise(actions(), static_cast<std::size_t>(states.cols()), schedule_.steps(), rng);
  return softmax_columns(logits(states, noise) / temperature_);
}

Vec DiffusionActor::mean_probabilities(const Vec& state) const {
  const auto noise = diffusion::zero_chain_noise(actions(), 1, schedule_.steps());
  return softmax(logits(Mat(state), noise).col(0) / temperature_);
}

int DiffusionActor::act(const Vec& state, Rng& rng, ActMode mode) const {
  if (static_cast<std::size_t>(state.size()) != state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "actor state length mismatch");
  }
  if (actions() == 1) return 0;
  if (mode == ActMode::kGreedy) {
    Eigen::Index best = 0;
    mean_probabilities(state).maxCoeff(&best);
    return static_cast<int>(best);
  }
  const Vec p = probabilities(Mat(state), rng).col(0);
  const double u = rng.uniform01();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    acc += p(a);
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(p.size() - 1);
}

}  // namespace gdmopt::d2sac
