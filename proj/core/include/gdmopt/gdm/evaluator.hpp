#pragma once

#include <span>

#include "gdmopt/nn/mlp.hpp"
#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::gdm {

// One executed solution and the objective the environment returned for it.
struct BanditExperience {
  Vec state;
  Vec condition;
  Vec solution;         // post-squash, as executed
  Vec scaled_solution;  // solution / env.solution_scale(state): the evaluator's input
  Vec logits;           // pre-squash, exploration noise included
  double reward = 0.0;
};

// Values and solution-gradients of a differentiable scorer over a batch.
struct ValueAndGrad {
  Vec value;         // B
  Mat solution_grad; // D x B, d value_b / d solution_b
};

// Anything the actor can climb: the learned evaluator, or an analytic
// stand-in in tests.
class SolutionValue {
 public:
  virtual ~SolutionValue() = default;
  virtual ValueAndGrad value_and_grad(const Mat& conditions, const Mat& solutions) const = 0;
};

// Q(g, p): an MLP over [g ; p] with a scalar output.
class SolutionEvaluator final : public SolutionValue {
 public:
  SolutionEvaluator(nn::ParamSet net, std::size_t condition_dim, std::size_t solution_dim);

  static SolutionEvaluator create(std::size_t condition_dim, std::size_t solution_dim,
                                  std::span<const std::size_t> hidden, nn::Activation activation, Rng& rng);

  std::size_t condition_dim() const { return condition_dim_; }
  std::size_t solution_dim() const { return solution_dim_; }
  const nn::ParamSet& net() const { return net_; }
  nn::ParamSet& mutable_net() { return net_; }

  Mat assemble_input(const Mat& conditions, const Mat& solutions) const;
  Vec predict(const Mat& conditions, const Mat& solutions) const;
  double predict(const Vec& condition, const Vec& solution) const;

  ValueAndGrad value_and_grad(const Mat& conditions, const Mat& solutions) const override;

 private:
  nn::ParamSet net_;
  std::size_t condition_dim_;
  std::size_t solution_dim_;
};

// mean_b (Q(g_b, p_b) - c r_b)^2 and its gradient with respect to the
// evaluator weights, with c = reward_scale.
nn::LossAndGrad critic_loss(const SolutionEvaluator& q, std::span<const BanditExperience> batch,
                            double reward_scale = 1.0);

}  // namespace gdmopt::gdm
