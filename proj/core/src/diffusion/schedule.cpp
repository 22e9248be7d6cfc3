#include "gdmopt/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "gdmopt/error.hpp"

namespace gdmopt::diffusion {

std::string_view schedule_kind_name(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "vp";
}

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "vp" || name == "variance-preserving") return ScheduleKind::kVariancePreserving;
  return std::nullopt;
}

NoiseSchedule NoiseSchedule::make(int steps, ScheduleKind kind, double beta_min, double beta_max) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "schedule needs at least one step");
  if (!(beta_min > 0.0) || !(beta_max >= beta_min) || !std::isfinite(beta_max)) {
    throw Error(ErrorCode::kInvalidArgument, "schedule requires 0 < beta_min <= beta_max");
  }
  if (kind == ScheduleKind::kLinear && !(beta_max < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "linear schedule requires beta_max < 1");
  }

  NoiseSchedule s;
  s.kind_ = kind;
  s.beta_min_ = beta_min;
  s.beta_max_ = beta_max;
  const double T = steps;
  for (int t = 1; t <= steps; ++t) {
    double b = 0.0;
    if (kind == ScheduleKind::kLinear) {
      b = steps == 1 ? beta_min : beta_min + (beta_max - beta_min) * (t - 1) / (T - 1);
    } else {
      b = -std::expm1(-beta_min / T - (beta_max - beta_min) * (2.0 * t - 1.0) / (2.0 * T * T));
    }
    if (!(b > 0.0 && b < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "schedule produced beta outside (0, 1) at step " + std::to_string(t));
    }
    s.betas_.push_back(b);
    s.alphas_.push_back(1.0 - b);
    s.alpha_bars_.push_back((t == 1 ? 1.0 : s.alpha_bars_.back()) * (1.0 - b));
  }
  return s;
}

std::size_t NoiseSchedule::index(int t) const {
  if (t < 1 || t > steps()) {
    throw Error(ErrorCode::kOutOfRange, "step " + std::to_string(t) + " outside 1.." + std::to_string(steps()));
  }
  return static_cast<std::size_t>(t - 1);
}

double NoiseSchedule::beta(int t) const { return betas_[index(t)]; }
double NoiseSchedule::alpha(int t) const { return alphas_[index(t)]; }
double NoiseSchedule::alpha_bar(int t) const { return alpha_bars_[index(t)]; }

}  // namespace gdmopt::diffusion
