#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace gdmopt {

// One evaluation record. Unset fields serialize as empty CSV cells.
struct MetricsRow {
  std::int64_t epoch = 0;
  std::optional<double> reward_mean;
  std::optional<double> reward_std;
  std::optional<double> gap_mean;
  std::optional<double> actor_loss;
  std::optional<double> critic_loss;
  std::optional<double> sigma;
  std::optional<double> wall_ms;
  std::optional<double> episode_return;  // sequential runs only
};

// First epoch e such that the gap is <= threshold at e and at the next
// `window - 1` evaluations (or every remaining one, if fewer are left).
std::optional<std::int64_t> convergence_epoch(const std::vector<MetricsRow>& rows, double threshold,
                                              std::size_t window = 3);

}  // namespace gdmopt
