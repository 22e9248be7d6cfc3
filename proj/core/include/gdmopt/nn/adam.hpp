#pragma once

#include <cstdint>

#include "gdmopt/nn/mlp.hpp"

namespace gdmopt::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global-norm clip applied before the moment update; <= 0 disables.
  double clip_norm = 10.0;
};

struct AdamState {
  AdamOptions options;
  GradSet first_moment;
  GradSet second_moment;
  std::int64_t step = 0;

  static AdamState for_params(const ParamSet& params, AdamOptions options = {});
};

// One bias-corrected Adam update. Throws ErrorCode::kNonFinite (leaving
// params and state untouched) when any gradient entry is NaN or infinite.
// Returns the pre-clip gradient norm.
double adam_step(ParamSet& params, const GradSet& grads, AdamState& state);

}  // namespace gdmopt::nn
