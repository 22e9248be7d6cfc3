#include "gdmopt/envs/constant.hpp"

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

ConstantEnv::ConstantEnv(ConstantEnvConfig cfg) : cfg_(cfg) {
  if (cfg_.actions < 1) throw Error(ErrorCode::kInvalidArgument, "constant env needs at least one action");
  if (cfg_.horizon < 1) throw Error(ErrorCode::kInvalidArgument, "constant env horizon must be >= 1");
}

Vec ConstantEnv::reset(Rng& /*rng*/) {
  t_ = 0;
  done_ = false;
  return Vec::Zero(1);
}

StepResult ConstantEnv::step(int action, Rng& /*rng*/) {
  if (done_) throw Error(ErrorCode::kInvalidArgument, "constant env stepped after the episode ended; call reset");
  if (action < 0 || static_cast<std::size_t>(action) >= cfg_.actions) {
    throw Error(ErrorCode::kOutOfRange, "constant env action out of range");
  }
  ++t_;
  StepResult r;
  r.state = Vec::Zero(1);
  r.reward = cfg_.reward;
  r.terminal = t_ >= cfg_.horizon;
  done_ = r.terminal;
  return r;
}

}  // namespace gdmopt::envs
