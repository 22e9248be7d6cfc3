#include "gdmopt/diffusion/expert_loss.hpp"

#include <cmath>

#include "gdmopt/diffusion/chain.hpp"
#include "gdmopt/error.hpp"

namespace gdmopt::diffusion {

ExpertDraws draw_expert(std::size_t batch, std::size_t dim, int steps, Rng& rng) {
  ExpertDraws d;
  d.steps.resize(batch);
  d.noise.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(batch));
  for (std::size_t b = 0; b < batch; ++b) {
    d.steps[b] = rng.uniform_int(1, steps);
    for (Eigen::Index i = 0; i < d.noise.rows(); ++i) d.noise(i, static_cast<Eigen::Index>(b)) = rng.normal();
  }
  return d;
}

nn::LossAndGrad expert_loss(const ConditionalDenoiser& d, const NoiseSchedule& s,
                            std::span<const ExpertExample> batch, const ExpertDraws& draws) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "expert_loss needs at least one example");
  if (draws.steps.size() != batch.size() || static_cast<std::size_t>(draws.noise.cols()) != batch.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "expert draws do not match the batch");
  }
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto D = static_cast<Eigen::Index>(d.solution_dim());
  const auto C = static_cast<Eigen::Index>(d.condition_dim());

  Mat noised(D, B);
  Mat conditions(C, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const ExpertExample& ex = batch[static_cast<std::size_t>(b)];
    if (ex.solution.size() != D || ex.condition.size() != C) {
      throw Error(ErrorCode::kDimensionMismatch, "expert example has wrong dimensions");
    }
    noised.col(b) = forward_sample(s, ex.solution, draws.steps[static_cast<std::size_t>(b)], draws.noise.col(b));
    conditions.col(b) = ex.condition;
  }

  nn::ForwardTape tape;
  const Mat pred = nn::forward(d.net(), d.assemble_input(noised, draws.steps, conditions), tape);
  const Mat diff = pred - draws.noise;

  nn::LossAndGrad out{diff.squaredNorm() / static_cast<double>(B), nn::GradSet::zeros_like(d.net())};
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::kNonFinite, "expert loss is not finite");
  nn::backward(d.net(), tape, (2.0 / static_cast<double>(B)) * diff, &out.grads);
  return out;
}

nn::LossAndGrad expert_loss(const ConditionalDenoiser& d, const NoiseSchedule& s,
                            std::span<const ExpertExample> batch, Rng& rng) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "expert_loss needs at least one example");
  return expert_loss(d, s, batch, draw_expert(batch.size(), d.solution_dim(), s.steps(), rng));
}

}  // namespace gdmopt::diffusion
