#include "gdmopt/nn/adam.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::nn {

AdamState AdamState::for_params(const ParamSet& params, AdamOptions options) {
  AdamState s;
  s.options = options;
  s.first_moment = GradSet::zeros_like(params);
  s.second_moment = GradSet::zeros_like(params);
  return s;
}

double adam_step(ParamSet& params, const GradSet& grads, AdamState& state) {
  if (!grads.shape_matches(params) || !state.first_moment.shape_matches(params) ||
      !state.second_moment.shape_matches(params)) {
    throw Error(ErrorCode::kDimensionMismatch, "adam_step: gradient/moment shape does not match parameters");
  }
  if (!grads.all_finite()) throw Error(ErrorCode::kNonFinite, "adam_step: gradient contains NaN or Inf");

  const AdamOptions& o = state.options;
  const double norm = grads.norm();
  const double scale = (o.clip_norm > 0.0 && norm > o.clip_norm) ? o.clip_norm / norm : 1.0;

  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = o.beta1 * m + (1.0 - o.beta1) * (scale * grad);
    v = o.beta2 * v + (1.0 - o.beta2) * (scale * grad).cwiseAbs2();
    param.array() -= o.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + o.epsilon);
  };

  for (std::size_t k = 0; k < params.num_layers(); ++k) {
    Layer& l = params.mutable_layer(k);
    update(l.weight, grads.weight[k], state.first_moment.weight[k], state.second_moment.weight[k]);
    update(l.bias, grads.bias[k], state.first_moment.bias[k], state.second_moment.bias[k]);
  }
  return norm;
}

}  // namespace gdmopt::nn
