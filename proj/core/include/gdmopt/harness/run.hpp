#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdmopt/error.hpp"
#include "gdmopt/harness/config.hpp"
#include "gdmopt/nn/checkpoint.hpp"

namespace gdmopt::harness {

// Overrides the configured output directory when set.
inline constexpr const char* kOutputDirEnv = "GDMOPT_OUTPUT_DIR";

// Process exit statuses used by the CLI.
enum ExitStatus : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitCheckpoint = 4,
};

int exit_status_for(const Error& e);

struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path metrics;     // metrics.csv
  std::filesystem::path checkpoint;  // checkpoint.gdm
  std::filesystem::path summary;     // summary.json

  static RunPaths in(const std::filesystem::path& dir);
};

std::filesystem::path resolve_output_dir(const RunConfig& cfg);

struct TrainReport {
  RunPaths paths;
  std::vector<MetricsRow> metrics;
  nlohmann::json summary;
};

// Runs the configured training into `dir`, writing metrics.csv,
// checkpoint.gdm and summary.json atomically. A rolling checkpoint is kept
// every cfg.checkpoint_every epochs; if training aborts on a non-finite value
// the metrics so far are written, the last rolling checkpoint is left in
// place and the error propagates.
TrainReport train(const RunConfig& cfg, const std::filesystem::path& dir);

// Greedy / noise-free evaluation of a checkpoint on `episodes` fresh states
// (one-shot envs) or episodes (sequential envs) drawn from `seed`, which
// defaults to the checkpoint's seed.
nlohmann::json evaluate_checkpoint(const nn::Checkpoint& ckpt, std::size_t episodes,
                                   std::optional<std::uint64_t> seed = std::nullopt);

// Water-filling solution for explicit gains.
nlohmann::json power_oracle(const std::vector<double>& gains, double total_power);
// Oracle solutions for `count` states sampled from the configured env.
nlohmann::json sampled_oracle(const RunConfig& cfg, std::size_t count);

using SweepGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Cartesian product of cfg.sweep followed by `extra`; point i trains into
// root/point_<i> and root/sweep.csv indexes the points.
nlohmann::json sweep(const RunConfig& cfg, const SweepGrid& extra, const std::filesystem::path& root,
                     std::ostream& log);

// Checkpoint bundling for the trained models.
nn::Checkpoint make_checkpoint(const RunConfig& cfg, const gdm::GdmModel& model, std::int64_t epoch);
nn::Checkpoint make_checkpoint(const RunConfig& cfg, const d2sac::D2sacModel& model, std::int64_t epoch);
RunConfig checkpoint_config(const nn::Checkpoint& ckpt);
gdm::GdmModel gdm_model_from(const nn::Checkpoint& ckpt, const RunConfig& cfg);
d2sac::D2sacModel d2sac_model_from(const nn::Checkpoint& ckpt, const RunConfig& cfg);

}  // namespace gdmopt::harness
