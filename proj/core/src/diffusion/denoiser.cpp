#include "gdmopt/diffusion/denoiser.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gdmopt/error.hpp"

namespace gdmopt::diffusion {

std::size_t time_embedding_dim(int steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "time embedding needs T >= 1");
  return 2 * static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(steps)) + 2.0));
}

Vec time_embedding(int t, int steps) {
  if (t < 1 || t > steps) throw Error(ErrorCode::kOutOfRange, "embedding step outside 1..T");
  const std::size_t dim = time_embedding_dim(steps);
  Vec e(static_cast<Eigen::Index>(dim));
  const double base = std::numbers::pi * t / (2.0 * steps);
  for (std::size_t k = 0; k < dim / 2; ++k) {
    const double arg = std::ldexp(base, static_cast<int>(k));
    e(static_cast<Eigen::Index>(2 * k)) = std::sin(arg);
    e(static_cast<Eigen::Index>(2 * k + 1)) = std::cos(arg);
  }
  return e;
}

ConditionalDenoiser::ConditionalDenoiser(nn::ParamSet net, std::size_t solution_dim, std::size_t condition_dim,
                                         int steps)
    : net_(std::move(net)),
      solution_dim_(solution_dim),
      condition_dim_(condition_dim),
      embedding_dim_(time_embedding_dim(steps)),
      steps_(steps) {
  if (net_.input_dim() != solution_dim_ + embedding_dim_ + condition_dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "denoiser net input " + std::to_string(net_.input_dim()) + " != D + E + C = " +
                    std::to_string(solution_dim_ + embedding_dim_ + condition_dim_));
  }
  if (net_.output_dim() != solution_dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "denoiser net output must equal the solution dim");
  }
  for (int t = 1; t <= steps_; ++t) embeddings_.push_back(time_embedding(t, steps_));
}

ConditionalDenoiser ConditionalDenoiser::create(std::size_t solution_dim, std::size_t condition_dim, int steps,
                                                std::span<const std::size_t> hidden, nn::Activation activation,
                                                Rng& rng) {
  std::vector<std::size_t> dims;
  dims.push_back(solution_dim + time_embedding_dim(steps) + condition_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(solution_dim);
  return ConditionalDenoiser(nn::make_mlp(dims, activation, nn::Activation::kLinear, rng), solution_dim,
                             condition_dim, steps);
}

void ConditionalDenoiser::check_batch(const Mat& x, std::size_t cols, const Mat& conditions) const {
  if (static_cast<std::size_t>(x.rows()) != solution_dim_ ||
      static_cast<std::size_t>(conditions.rows()) != condition_dim_ || static_cast<std::size_t>(x.cols()) != cols ||
      conditions.cols() != x.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "denoiser input batch has wrong shape");
  }
}

Mat ConditionalDenoiser::assemble_input(const Mat& x, int t, const Mat& conditions) const {
  if (t < 1 || t > steps_) throw Error(ErrorCode::kOutOfRange, "denoiser step " + std::to_string(t) + " outside 1..T");
  check_batch(x, static_cast<std::size_t>(x.cols()), conditions);
  const auto D = static_cast<Eigen::Index>(solution_dim_);
  const auto E = static_cast<Eigen::Index>(embedding_dim_);
  const auto C = static_cast<Eigen::Index>(condition_dim_);
  Mat in(D + E + C, x.cols());
  in.topRows(D) = x;
  in.middleRows(D, E) = embeddings_[static_cast<std::size_t>(t - 1)].replicate(1, x.cols());
  in.bottomRows(C) = conditions;
  return in;
}

Mat ConditionalDenoiser::assemble_input(const Mat& x, std::span<const int> t, const Mat& conditions) const {
  check_batch(x, t.size(), conditions);
  const auto D = static_cast<Eigen::Index>(solution_dim_);
  const auto E = static_cast<Eigen::Index>(embedding_dim_);
  const auto C = static_cast<Eigen::Index>(condition_dim_);
  Mat in(D + E + C, x.cols());
  in.topRows(D) = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const int step = t[static_cast<std::size_t>(j)];
    if (step < 1 || step > steps_) throw Error(ErrorCode::kOutOfRange, "denoiser step outside 1..T");
    in.block(D, j, E, 1) = embeddings_[static_cast<std::size_t>(step - 1)];
  }
  in.bottomRows(C) = conditions;
  return in;
}

Vec ConditionalDenoiser::predict(const Vec& x, int t, const Vec& condition) const {
  return predict(Mat(x), t, Mat(condition)).col(0);
}

Mat ConditionalDenoiser::predict(const Mat& x, int t, const Mat& conditions) const {
  return nn::forward(net_, assemble_input(x, t, conditions));
}

}  // namespace gdmopt::diffusion
