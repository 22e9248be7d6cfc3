#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gdmopt/error.hpp"
#include "gdmopt/harness/run.hpp"
#include "gdmopt/io.hpp"
#include "gdmopt/nn/checkpoint.hpp"
#include "gdmopt/runtime.hpp"

namespace {

using gdmopt::Error;
using gdmopt::ErrorCode;
namespace harness = gdmopt::harness;

void emit(const nlohmann::json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out.empty()) gdmopt::write_file_atomic(out, text);
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
  const harness::RunConfig cfg = harness::load_config(config_path);
  const std::filesystem::path dir = out_dir.empty() ? harness::resolve_output_dir(cfg) : std::filesystem::path(out_dir);
  const harness::TrainReport report = harness::train(cfg, dir);
  std::cerr << "wrote " << report.paths.metrics.string() << " (" << report.metrics.size() << " rows) and "
            << report.paths.checkpoint.string() << "\n";
  std::cout << report.summary.dump(2) << "\n";
  return harness::kExitOk;
}

int cmd_eval(const std::string& ckpt_path, std::size_t episodes, std::optional<std::uint64_t> seed,
             const std::string& out) {
  const gdmopt::nn::Checkpoint ckpt = gdmopt::nn::load_checkpoint(ckpt_path);
  emit(harness::evaluate_checkpoint(ckpt, episodes, seed), out);
  return harness::kExitOk;
}

int cmd_oracle(const std::vector<double>& gains, double power, const std::string& config_path, std::size_t count,
               const std::string& out) {
  if (!config_path.empty()) {
    emit(harness::sampled_oracle(harness::load_config(config_path), count), out);
  } else {
    if (gains.empty()) throw Error(ErrorCode::kConfig, "oracle needs --gains or --config");
    emit(harness::power_oracle(gains, power), out);
  }
  return harness::kExitOk;
}

// Parses `key=a|b|c`.
std::pair<std::string, std::vector<std::string>> parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kConfig, "--grid expects key=a|b, got '" + spec + "'");
  }
  std::vector<std::string> values;
  std::stringstream ss(spec.substr(eq + 1));
  for (std::string v; std::getline(ss, v, '|');) {
    if (v.empty()) throw Error(ErrorCode::kConfig, "--grid '" + spec + "' has an empty value");
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::kConfig, "--grid '" + spec + "' has no values");
  return {spec.substr(0, eq), values};
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& grid_specs, const std::string& out_dir) {
  const harness::RunConfig cfg = harness::load_config(config_path);
  harness::SweepGrid extra;
  for (const auto& s : grid_specs) extra.push_back(parse_grid(s));
  const std::filesystem::path root = out_dir.empty() ? harness::resolve_output_dir(cfg) : std::filesystem::path(out_dir);
  const nlohmann::json summary = harness::sweep(cfg, extra, root, std::cerr);
  std::cout << summary.dump(2) << "\n";
  return summary.value("ok", false) ? harness::kExitOk : harness::kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  gdmopt::configure_allocator();
  CLI::App app{"gdmopt: diffusion-model solvers for network resource allocation"};
  app.require_subcommand(1);

  std::string train_config, train_out;
  auto* train = app.add_subcommand("train", "Train from a config file; writes metrics.csv and checkpoint.gdm");
  train->add_option("config", train_config, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Output directory (overrides config and GDMOPT_OUTPUT_DIR)");

  std::string eval_ckpt, eval_out;
  std::size_t eval_episodes = 100;
  std::optional<std::uint64_t> eval_seed;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint without exploration noise");
  eval->add_option("checkpoint", eval_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "Evaluation states or episodes")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Evaluation seed (defaults to the training seed)");
  eval->add_option("--out", eval_out, "Also write the summary JSON here");

  std::vector<double> oracle_gains;
  double oracle_power = 10.0;
  std::string oracle_config, oracle_out;
  std::size_t oracle_count = 1;
  auto* oracle = app.add_subcommand("oracle", "Print oracle solutions as JSON");
  auto* gains_opt = oracle->add_option("--gains", oracle_gains, "Channel gains (power env water-filling)")->delimiter(',');
  oracle->add_option("--power", oracle_power, "Total power budget")->capture_default_str();
  oracle->add_option("--config", oracle_config, "Sample states from this config's env and solve them")
      ->check(CLI::ExistingFile)
      ->excludes(gains_opt);
  oracle->add_option("--count", oracle_count, "Number of sampled states with --config")->capture_default_str();
  oracle->add_option("--out", oracle_out, "Also write the JSON here");

  std::string sweep_config, sweep_out;
  std::vector<std::string> sweep_grid;
  auto* sweep = app.add_subcommand("sweep", "Train every point of a config grid; one run directory per point");
  sweep->add_option("config", sweep_config, "Base config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", sweep_grid, "Extra sweep axis key=a|b (repeatable)");
  sweep->add_option("--out", sweep_out, "Sweep root directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : harness::kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_config, train_out);
    if (*eval) return cmd_eval(eval_ckpt, eval_episodes, eval_seed, eval_out);
    if (*oracle) return cmd_oracle(oracle_gains, oracle_power, oracle_config, oracle_count, oracle_out);
    if (*sweep) return cmd_sweep(sweep_config, sweep_grid, sweep_out);
  } catch (const Error& e) {
    std::cerr << "gdmopt: " << e.what() << "\n";
    return harness::exit_status_for(e);
  } catch (const std::exception& e) {
    std::cerr << "gdmopt: " << e.what() << "\n";
    return harness::kExitFailure;
  }
  return harness::kExitFailure;
}
