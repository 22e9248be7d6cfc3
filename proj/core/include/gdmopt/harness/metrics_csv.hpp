#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gdmopt/metrics.hpp"

namespace gdmopt::harness {

inline constexpr int kMetricsSchemaVersion = 1;

// Line 1: "# metrics_schema=<version>". Line 2: the header
//   epoch,reward_mean,reward_std,gap_mean,actor_loss,critic_loss,sigma,wall_ms
// with ",episode_return" appended for sequential runs. Unset values are
// empty cells; numbers use the shortest round-trip decimal form.
std::vector<std::string> metrics_columns(bool episode_return);
std::string format_metrics_csv(const std::vector<MetricsRow>& rows, bool episode_return);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows, bool episode_return);

}  // namespace gdmopt::harness
