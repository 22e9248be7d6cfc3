#include "gdmopt/diffusion/chain.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::diffusion {

namespace {

void check_schedule(const ConditionalDenoiser& d, const NoiseSchedule& s) {
  if (d.steps() != s.steps()) throw Error(ErrorCode::kDimensionMismatch, "denoiser and schedule disagree on T");
}

// Coefficient on eps in the reverse step.
double eps_coefficient(const NoiseSchedule& s, int t) {
  return s.beta(t) / std::sqrt(s.alpha(t) * (1.0 - s.alpha_bar(t)));
}

Mat gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

Vec forward_sample(const NoiseSchedule& s, const Vec& x0, int t, const Vec& noise) {
  if (x0.size() != noise.size()) throw Error(ErrorCode::kDimensionMismatch, "forward_sample: noise length != x0");
  const double ab = s.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Vec reverse_step(const ConditionalDenoiser& d, const NoiseSchedule& s, const Vec& x_t, int t, const Vec& g,
                 const Vec& noise) {
  check_schedule(d, s);
  if (noise.size() != x_t.size()) throw Error(ErrorCode::kDimensionMismatch, "reverse_step: noise length != x_t");
  const Vec eps = d.predict(x_t, t, g);
  if (!eps.allFinite()) throw Error(ErrorCode::kNonFinite, "denoiser produced a non-finite noise estimate");
  return x_t / std::sqrt(s.alpha(t)) - eps_coefficient(s, t) * eps + std::sqrt(s.beta(t)) * noise;
}

ChainNoise draw_chain_noise(std::size_t dim, std::size_t batch, int steps, Rng& rng) {
  ChainNoise n;
  n.initial = gaussian(dim, batch, rng);
  n.step.resize(static_cast<std::size_t>(steps));
  n.step[0] = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(batch));
  for (int t = steps; t >= 2; --t) n.step[static_cast<std::size_t>(t - 1)] = gaussian(dim, batch, rng);
  return n;
}

ChainNoise zero_chain_noise(std::size_t dim, std::size_t batch, int steps) {
  const Mat zero = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(batch));
  return ChainNoise{zero, std::vector<Mat>(static_cast<std::size_t>(steps), zero)};
}

Mat run_chain(const ConditionalDenoiser& d, const NoiseSchedule& s, const Mat& conditions, const ChainNoise& noise,
              ChainTrace* trace) {
  check_schedule(d, s);
  if (noise.step.size() != static_cast<std::size_t>(s.steps()) || noise.initial.cols() != conditions.cols() ||
      static_cast<std::size_t>(noise.initial.rows()) != d.solution_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "chain noise does not match the batch");
  }
  if (trace != nullptr) trace->tapes.assign(static_cast<std::size_t>(s.steps()), nn::ForwardTape{});

  Mat x = noise.initial;
  for (int t = s.steps(); t >= 1; --t) {
    const Mat input = d.assemble_input(x, t, conditions);
    const Mat eps = trace != nullptr ? nn::forward(d.net(), input, trace->tapes[static_cast<std::size_t>(t - 1)])
                                     : nn::forward(d.net(), input);
    if (!eps.allFinite()) throw Error(ErrorCode::kNonFinite, "denoiser produced a non-finite noise estimate");
    x = x / std::sqrt(s.alpha(t)) - eps_coefficient(s, t) * eps;
    if (t > 1) x += std::sqrt(s.beta(t)) * noise.step[static_cast<std::size_t>(t - 1)];
  }
  return x;
}

Mat sample_chain(const ConditionalDenoiser& d, const NoiseSchedule& s, const Mat& conditions, Rng& rng) {
  const ChainNoise noise = draw_chain_noise(d.solution_dim(), static_cast<std::size_t>(conditions.cols()), s.steps(), rng);
  return run_chain(d, s, conditions, noise);
}

Vec sample_chain(const ConditionalDenoiser& d, const NoiseSchedule& s, const Vec& condition, Rng& rng) {
  return sample_chain(d, s, Mat(condition), rng).col(0);
}

Mat chain_backward(const ConditionalDenoiser& d, const NoiseSchedule& s, const ChainTrace& trace, const Mat& grad_x0,
                   nn::GradSet& grads) {
  check_schedule(d, s);
  if (trace.tapes.size() != static_cast<std::size_t>(s.steps())) {
    throw Error(ErrorCode::kStaleTape, "chain trace does not cover every step");
  }
  const auto D = static_cast<Eigen::Index>(d.solution_dim());
  Mat g = grad_x0;  // dL / dx_{t-1} entering step t
  for (int t = 1; t <= s.steps(); ++t) {
    const Mat upstream = -eps_coefficient(s, t) * g;
    const Mat input_grad = nn::backward(d.net(), trace.tapes[static_cast<std::size_t>(t - 1)], upstream, &grads);
    g = g / std::sqrt(s.alpha(t)) + input_grad.topRows(D);
  }
  return g;
}

}  // namespace gdmopt::diffusion
