#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gdmopt/d2sac/trainer.hpp"
#include "gdmopt/envs/bandwidth.hpp"
#include "gdmopt/envs/cartpole.hpp"
#include "gdmopt/envs/constant.hpp"
#include "gdmopt/envs/contract.hpp"
#include "gdmopt/envs/power.hpp"
#include "gdmopt/envs/provider.hpp"
#include "gdmopt/gdm/trainer.hpp"

namespace gdmopt::harness {

enum class Algorithm { kGdmOnline, kGdmExpert, kD2sac, kBaseline };

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Everything a run needs. Built from a key = value document; see
// config_keys() for the accepted keys.
struct RunConfig {
  std::string env;
  Algorithm algorithm = Algorithm::kGdmOnline;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/default";
  std::int64_t checkpoint_every = 1000;  // epochs between rolling checkpoints; 0 keeps only the final one

  envs::PowerEnvConfig power;
  envs::ContractEnvConfig contract;
  envs::BandwidthEnvConfig bandwidth;
  envs::ProviderEnvConfig provider;
  envs::CartPoleConfig cartpole;
  envs::ConstantEnvConfig constant;

  gdm::GdmTrainConfig gdm;
  std::size_t expert_dataset = 1000;
  d2sac::D2sacConfig d2sac;

  std::string baseline = "average";
  std::size_t baseline_samples = 1000;  // states (bandit envs) or episodes (sequential envs)

  // Accepted settings in document order, as written. Reparsing these
  // reproduces the config.
  std::vector<std::pair<std::string, std::string>> entries;
  // sweep.<key> = a | b | c declarations, in document order.
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;

  bool is_bandit_env() const;
  bool is_mdp_env() const;
};

// Keys accepted by apply_setting, sorted.
std::vector<std::string> config_keys();

// Applies one setting; throws Error(kConfig) naming the key on a bad key or
// value. The setting is recorded in cfg.entries.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses a document of `key = value` lines. '#' starts a comment; blank lines
// are ignored. Errors carry "<source>:<line>:" prefixes. Required keys: env,
// algorithm, seed.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Rebuilds a config from recorded entries (e.g. from checkpoint metadata).
RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries);

// Checks required fields, the env/algorithm pairing, and that the selected
// environment accepts its parameters.
void validate(const RunConfig& cfg);

// The configured environment. Throws Error(kConfig) when cfg.env is of the
// other kind.
std::unique_ptr<envs::BanditEnv> make_bandit_env(const RunConfig& cfg);
std::unique_ptr<envs::MdpEnv> make_mdp_env(const RunConfig& cfg);

// Canonical text form: one `key = value` line per recorded entry.
std::string to_text(const RunConfig& cfg);

}  // namespace gdmopt::harness
