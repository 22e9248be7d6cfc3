#include "gdmopt/envs/cartpole.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

CartPoleEnv::CartPoleEnv(CartPoleConfig cfg) : cfg_(cfg) {
  if (!(cfg_.cart_mass > 0.0 && cfg_.pole_mass > 0.0 && cfg_.half_length > 0.0 && cfg_.dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cartpole masses, length and dt must be positive");
  }
  if (cfg_.max_steps < 1) throw Error(ErrorCode::kInvalidArgument, "cartpole max_steps must be >= 1");
}

Vec CartPoleEnv::integrate(const Vec& s, double force) const {
  const double total_mass = cfg_.cart_mass + cfg_.pole_mass;
  const double pole_ml = cfg_.pole_mass * cfg_.half_length;
  const double x_dot = s(1);
  const double theta = s(2);
  const double theta_dot = s(3);
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const double temp = (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (cfg_.gravity * sin_t - cos_t * temp) /
                           (cfg_.half_length * (4.0 / 3.0 - cfg_.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;

  Vec next(4);
  next << s(0) + cfg_.dt * x_dot, x_dot + cfg_.dt * x_acc, theta + cfg_.dt * theta_dot,
      theta_dot + cfg_.dt * theta_acc;
  return next;
}

void CartPoleEnv::set_state(const Vec& state) {
  if (state.size() != 4) throw Error(ErrorCode::kDimensionMismatch, "cartpole state has 4 entries");
  state_ = state;
  steps_ = 0;
  done_ = false;
}

Vec CartPoleEnv::reset(Rng& rng) {
  Vec s(4);
  for (Eigen::Index i = 0; i < 4; ++i) s(i) = rng.uniform(-cfg_.init_range, cfg_.init_range);
  set_state(s);
  return state_;
}

StepResult CartPoleEnv::step(int action, Rng& /*rng*/) {
  if (done_) throw Error(ErrorCode::kInvalidArgument, "cartpole stepped after the episode ended; call reset");
  if (action != 0 && action != 1) throw Error(ErrorCode::kOutOfRange, "cartpole action must be 0 or 1");
  state_ = integrate(state_, action == 1 ? cfg_.force : -cfg_.force);
  ++steps_;

  StepResult r;
  r.state = state_;
  r.reward = 1.0;
  r.terminal = std::abs(state_(0)) > cfg_.position_limit || std::abs(state_(2)) > cfg_.angle_limit;
  r.truncated = !r.terminal && steps_ >= cfg_.max_steps;
  done_ = r.done();
  return r;
}

std::unique_ptr<CartPoleEnv> cartpole_env(CartPoleConfig cfg) { return std::make_unique<CartPoleEnv>(cfg); }

}  // namespace gdmopt::envs
