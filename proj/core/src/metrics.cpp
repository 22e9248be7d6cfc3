#include "gdmopt/metrics.hpp"

#include <algorithm>

namespace gdmopt {

std::optional<std::int64_t> convergence_epoch(const std::vector<MetricsRow>& rows, double threshold,
                                              std::size_t window) {
  window = std::max<std::size_t>(window, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t end = std::min(rows.size(), i + window);
    bool ok = true;
    for (std::size_t j = i; j < end && ok; ++j) ok = rows[j].gap_mean && *rows[j].gap_mean <= threshold;
    if (ok) return rows[i].epoch;
  }
  return std::nullopt;
}

}  // namespace gdmopt
