#include "gdmopt/d2sac/critic.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::d2sac {

namespace {

Mat stack_states(std::span<const Transition> batch, bool next) {
  const auto S = (next ? batch[0].next_state : batch[0].state).size();
  Mat m(S, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) m.col(static_cast<Eigen::Index>(b)) = next ? batch[b].next_state : batch[b].state;
  return m;
}

double regress(nn::ParamSet& q, std::span<const Transition> batch, const Mat& states, const Vec& targets,
               nn::AdamState& opt) {
  const auto B = static_cast<Eigen::Index>(batch.size());
  nn::ForwardTape tape;
  const Mat out = nn::forward(q, states, tape);
  Mat upstream = Mat::Zero(out.rows(), B);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const int a = batch[static_cast<std::size_t>(b)].action;
    if (a < 0 || a >= out.rows()) throw Error(ErrorCode::kOutOfRange, "transition action out of range");
    const double diff = out(a, b) - targets(b);
    loss += diff * diff;
    upstream(a, b) = 2.0 * diff / static_cast<double>(B);
  }
  nn::GradSet grads = nn::GradSet::zeros_like(q);
  nn::backward(q, tape, upstream, &grads);
  nn::adam_step(q, grads, opt);
  return loss / static_cast<double>(B);
}

}  // namespace

DoubleCritic DoubleCritic::create(std::size_t state_dim, std::size_t actions, std::span<const std::size_t> hidden,
                                  nn::Activation activation, Rng& rng, CriticConfig config) {
  std::vector<std::size_t> dims{state_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(actions);
  Rng r1 = rng.split("q1");
  Rng r2 = rng.split("q2");
  DoubleCritic c{nn::make_mlp(dims, activation, nn::Activation::kLinear, r1),
                 nn::make_mlp(dims, activation, nn::Activation::kLinear, r2), {}, {}, config};
  c.target1 = c.q1;
  c.target2 = c.q2;
  c.validate();
  return c;
}

void DoubleCritic::validate() const {
  if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1)");
  if (!(config.tau > 0.0 && config.tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in (0, 1]");
  if (!(config.entropy_coef >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "entropy coefficient must be >= 0");
  if (!q1.shape_equals(q2) || !q1.shape_equals(target1) || !q2.shape_equals(target2)) {
    throw Error(ErrorCode::kDimensionMismatch, "critic and target shapes differ");
  }
}

Mat conservative_min(const Mat& a, const Mat& b) {
  const Mat m = a.cwiseMin(b);
  if (!((m.array() <= a.array()).all() && (m.array() <= b.array()).all())) {
    throw Error(ErrorCode::kNonFinite, "critic values are not finite");
  }
  return m;
}

Vec td_targets(const Mat& next_probs, const Mat& target_q1, const Mat& target_q2, const Vec& rewards,
               const std::vector<bool>& terminal, double gamma, double entropy_coef) {
  const auto B = rewards.size();
  if (next_probs.cols() != B || target_q1.cols() != B || target_q2.cols() != B ||
      terminal.size() != static_cast<std::size_t>(B) || next_probs.rows() != target_q1.rows() ||
      target_q1.rows() != target_q2.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "td_targets inputs disagree on shape");
  }
  const Mat q = conservative_min(target_q1, target_q2);
  Vec y = rewards;
  for (Eigen::Index b = 0; b < B; ++b) {
    if (terminal[static_cast<std::size_t>(b)] || gamma == 0.0) continue;
    double soft_value = 0.0;
    for (Eigen::Index a = 0; a < q.rows(); ++a) {
      const double p = next_probs(a, b);
      if (p > 0.0) soft_value += p * (q(a, b) - entropy_coef * std::log(p));
    }
    y(b) += gamma * soft_value;
  }
  return y;
}

CriticLosses critic_update(DoubleCritic& c, const DiffusionActor& actor, std::span<const Transition> batch,
                           nn::AdamState& opt1, nn::AdamState& opt2, Rng& rng) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "critic_update needs a non-empty batch");
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Mat states = stack_states(batch, false);
  const Mat next = stack_states(batch, true);

  Vec rewards(B);
  std::vector<bool> terminal(batch.size());
  for (Eigen::Index b = 0; b < B; ++b) {
    rewards(b) = batch[static_cast<std::size_t>(b)].reward;
    terminal[static_cast<std::size_t>(b)] = batch[static_cast<std::size_t>(b)].terminal;
  }
  const Mat next_probs = actor.probabilities(next, rng);
  CriticLosses out;
  out.targets = td_targets(next_probs, nn::forward(c.target1, next), nn::forward(c.target2, next), rewards, terminal,
                           c.config.gamma, c.config.entropy_coef);
  out.q1 = regress(c.q1, batch, states, out.targets, opt1);
  out.q2 = regress(c.q2, batch, states, out.targets, opt2);
  nn::soft_update(c.target1, c.q1, c.config.tau);
  nn::soft_update(c.target2, c.q2, c.config.tau);
  return out;
}

ActorObjective actor_objective(const DiffusionActor& actor, const DoubleCritic& c, const Mat& states,
                               const diffusion::ChainNoise& noise) {
  const auto B = states.cols();
  if (B == 0) throw Error(ErrorCode::kEmptyBatch, "actor_objective needs a non-empty batch");
  const double lambda = c.config.entropy_coef;
  const double temp = actor.temperature();

  diffusion::ChainTrace trace;
  const Mat z = actor.logits(states, noise, &trace);
  ActorObjective out;
  out.probs = softmax_columns(z / temp);
  const Mat q = conservative_min(nn::forward(c.q1, states), nn::forward(c.q2, states));

  Mat grad_z(z.rows(), B);
  double objective = 0.0;
  double entropy_sum = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const Vec p = out.probs.col(b);
    // Per-action soft value v_a = q_a - lambda log pi_a; dJ/dz_a = pi_a (v_a - pi.v) / temp.
    Vec v(p.size());
    for (Eigen::Index a = 0; a < p.size(); ++a) v(a) = q(a, b) - lambda * (p(a) > 0.0 ? std::log(p(a)) : 0.0);
    const double h = entropy(p);
    entropy_sum += h;
    objective += p.dot(q.col(b)) + lambda * h;
    const double pv = p.dot(v);
    // The loss is -mean J.
    grad_z.col(b) = -(p.array() * (v.array() - pv)).matrix() / (temp * static_cast<double>(B));
  }
  out.loss = -objective / static_cast<double>(B);
  out.entropy_mean = entropy_sum / static_cast<double>(B);
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::kNonFinite, "actor loss is not finite");
  out.grads = nn::GradSet::zeros_like(actor.denoiser().net());
  diffusion::chain_backward(actor.denoiser(), actor.schedule(), trace, grad_z, out.grads);
  return out;
}

double actor_update(DiffusionActor& actor, const DoubleCritic& c, std::span<const Transition> batch,
                    nn::AdamState& opt, Rng& rng) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "actor_update needs a non-empty batch");
  const Mat states = stack_states(batch, false);
  const auto noise =
      diffusion::draw_chain_noise(actor.actions(), batch.size(), actor.schedule().steps(), rng);
  ActorObjective obj = actor_objective(actor, c, states, noise);
  nn::adam_step(actor.mutable_denoiser().mutable_net(), obj.grads, opt);
  return obj.loss;
}

}  // namespace gdmopt::d2sac
