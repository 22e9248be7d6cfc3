#include "gdmopt/gdm/evaluator.hpp"

#include "gdmopt/error.hpp"

namespace gdmopt::gdm {

SolutionEvaluator::SolutionEvaluator(nn::ParamSet net, std::size_t condition_dim, std::size_t solution_dim)
    : net_(std::move(net)), condition_dim_(condition_dim), solution_dim_(solution_dim) {
  if (net_.input_dim() != condition_dim + solution_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "evaluator input dim != condition dim + solution dim");
  }
  if (net_.output_dim() != 1) throw Error(ErrorCode::kDimensionMismatch, "evaluator must have a scalar output");
}

SolutionEvaluator SolutionEvaluator::create(std::size_t condition_dim, std::size_t solution_dim,
                                            std::span<const std::size_t> hidden, nn::Activation activation,
                                            Rng& rng) {
  std::vector<std::size_t> dims{condition_dim + solution_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return SolutionEvaluator(nn::make_mlp(dims, activation, nn::Activation::kLinear, rng), condition_dim,
                           solution_dim);
}

Mat SolutionEvaluator::assemble_input(const Mat& conditions, const Mat& solutions) const {
  if (static_cast<std::size_t>(conditions.rows()) != condition_dim_ ||
      static_cast<std::size_t>(solutions.rows()) != solution_dim_ || conditions.cols() != solutions.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "evaluator batch shape mismatch");
  }
  Mat in(conditions.rows() + solutions.rows(), conditions.cols());
  in << conditions, solutions;
  return in;
}

Vec SolutionEvaluator::predict(const Mat& conditions, const Mat& solutions) const {
  return nn::forward(net_, assemble_input(conditions, solutions)).row(0).transpose();
}

double SolutionEvaluator::predict(const Vec& condition, const Vec& solution) const {
  return predict(Mat(condition), Mat(solution))(0);
}

ValueAndGrad SolutionEvaluator::value_and_grad(const Mat& conditions, const Mat& solutions) const {
  nn::ForwardTape tape;
  const Mat out = nn::forward(net_, assemble_input(conditions, solutions), tape);
  const Mat input_grad = nn::backward(net_, tape, Mat::Ones(1, out.cols()), nullptr);
  return ValueAndGrad{out.row(0).transpose(), input_grad.bottomRows(static_cast<Eigen::Index>(solution_dim_))};
}

nn::LossAndGrad critic_loss(const SolutionEvaluator& q, std::span<const BanditExperience> batch,
                            double reward_scale) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "critic_loss needs a non-empty batch");
  const auto B = static_cast<Eigen::Index>(batch.size());
  Mat cond(static_cast<Eigen::Index>(q.condition_dim()), B);
  Mat sol(static_cast<Eigen::Index>(q.solution_dim()), B);
  Vec reward(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const BanditExperience& e = batch[static_cast<std::size_t>(b)];
    cond.col(b) = e.condition;
    sol.col(b) = e.scaled_solution;
    reward(b) = reward_scale * e.reward;
  }
  nn::ForwardTape tape;
  const Mat pred = nn::forward(q.net(), q.assemble_input(cond, sol), tape);
  const Vec diff = pred.row(0).transpose() - reward;

  nn::LossAndGrad out{diff.squaredNorm() / static_cast<double>(B), nn::GradSet::zeros_like(q.net())};
  const Mat upstream = (2.0 / static_cast<double>(B)) * diff.transpose();
  nn::backward(q.net(), tape, upstream, &out.grads);
  return out;
}

}  // namespace gdmopt::gdm
