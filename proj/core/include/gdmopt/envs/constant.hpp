#pragma once

#include <memory>

#include "gdmopt/envs/mdp_env.hpp"

namespace gdmopt::envs {

struct ConstantEnvConfig {
  std::size_t actions = 2;
  int horizon = 10;
  double reward = 1.0;
};

// Every action earns the same reward; episodes last exactly `horizon` steps.
class ConstantEnv final : public MdpEnv {
 public:
  explicit ConstantEnv(ConstantEnvConfig cfg = {});

  std::string_view name() const override { return "constant"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t num_actions() const override { return cfg_.actions; }

  Vec reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;
  std::unique_ptr<MdpEnv> clone() const override { return std::make_unique<ConstantEnv>(*this); }

 private:
  ConstantEnvConfig cfg_;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace gdmopt::envs
