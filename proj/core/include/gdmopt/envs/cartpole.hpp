#pragma once

#include <memory>

#include "gdmopt/envs/mdp_env.hpp"

namespace gdmopt::envs {

struct CartPoleConfig {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force = 10.0;
  double dt = 0.02;
  double angle_limit = 12.0 * 3.14159265358979323846 / 180.0;
  double position_limit = 2.4;
  int max_steps = 500;
  double init_range = 0.05;
};

// Classic cart-pole with explicit Euler integration. State (x, x_dot, theta,
// theta_dot); action 0 pushes left, 1 pushes right; +1 reward per step
// including the failing one. Reaching max_steps truncates the episode.
class CartPoleEnv final : public MdpEnv {
 public:
  explicit CartPoleEnv(CartPoleConfig cfg = {});

  const CartPoleConfig& config() const { return cfg_; }

  std::string_view name() const override { return "cartpole"; }
  std::size_t state_dim() const override { return 4; }
  std::size_t num_actions() const override { return 2; }

  Vec reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;
  std::unique_ptr<MdpEnv> clone() const override { return std::make_unique<CartPoleEnv>(*this); }

  void set_state(const Vec& state);
  const Vec& state() const { return state_; }
  // One Euler step under an arbitrary horizontal force, ignoring limits.
  Vec integrate(const Vec& state, double force) const;

 private:
  CartPoleConfig cfg_;
  Vec state_ = Vec::Zero(4);
  int steps_ = 0;
  bool done_ = true;
};

std::unique_ptr<CartPoleEnv> cartpole_env(CartPoleConfig cfg = {});

}  // namespace gdmopt::envs
