#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace gdmopt::diffusion {

enum class ScheduleKind { kLinear, kVariancePreserving };

std::string_view schedule_kind_name(ScheduleKind kind);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);

// Per-step noise variances for a T-step chain. Steps are 1-based everywhere in
// the public interface: beta(1) is the first forward step, alpha_bar(T) the
// noisiest marginal.
//
//   linear:  beta_t = beta_min + (beta_max - beta_min) (t - 1) / (T - 1)
//            requires 0 < beta_min <= beta_max < 1
//   VP:      beta_t = 1 - exp(-beta_min / T - (beta_max - beta_min)(2t - 1) / (2 T^2))
//            beta_min/beta_max are continuous-time rates; requires 0 < beta_min <= beta_max
class NoiseSchedule {
 public:
  static NoiseSchedule make(int steps, ScheduleKind kind, double beta_min, double beta_max);

  int steps() const { return static_cast<int>(betas_.size()); }
  ScheduleKind kind() const { return kind_; }
  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }

  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bars_; }

 private:
  NoiseSchedule() = default;
  std::size_t index(int t) const;

  ScheduleKind kind_ = ScheduleKind::kVariancePreserving;
  double beta_min_ = 0.0;
  double beta_max_ = 0.0;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

}  // namespace gdmopt::diffusion
