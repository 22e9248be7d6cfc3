#include "gdmopt/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "gdmopt/error.hpp"
#include "gdmopt/io.hpp"

namespace gdmopt::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad("expects a number, got '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad("expects an integer, got '" + v + "'");
  return out;
}

std::size_t to_count(const std::string& v) {
  const std::int64_t n = to_int(v);
  if (n < 0) bad("expects a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad("expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (out.empty() || std::any_of(out.begin(), out.end(), [](const std::string& s) { return s.empty(); })) {
    bad("expects a '" + std::string(1, sep) + "'-separated list, got '" + v + "'");
  }
  return out;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v, ',')) out.push_back(to_double(s));
  return out;
}

std::vector<std::size_t> to_counts(const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v, ',')) out.push_back(to_count(s));
  return out;
}

diffusion::ScheduleKind to_schedule(const std::string& v) {
  const auto k = diffusion::parse_schedule_kind(v);
  if (!k) bad("expects linear or vp, got '" + v + "'");
  return *k;
}

nn::Activation to_activation(const std::string& v) {
  const auto a = nn::parse_activation(v);
  if (!a) bad("expects tanh, relu or linear, got '" + v + "'");
  return *a;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"env", [](RunConfig& c, const std::string& v) { c.env = v; }},
      {"algorithm",
       [](RunConfig& c, const std::string& v) {
         const auto a = parse_algorithm(v);
         if (!a) bad("expects gdm-online, gdm-expert, d2sac or baseline, got '" + v + "'");
         c.algorithm = *a;
       }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(to_count(v)); }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"checkpoint_every", [](RunConfig& c, const std::string& v) { c.checkpoint_every = to_int(v); }},
      {"record_wall_clock",
       [](RunConfig& c, const std::string& v) { c.gdm.record_wall_clock = c.d2sac.record_wall_clock = to_bool(v); }},
      {"eval_threads", [](RunConfig& c, const std::string& v) { c.gdm.eval_threads = to_count(v); }},

      {"power.channels", [](RunConfig& c, const std::string& v) { c.power.channels = to_count(v); }},
      {"power.gain_min", [](RunConfig& c, const std::string& v) { c.power.gain_min = to_double(v); }},
      {"power.gain_max", [](RunConfig& c, const std::string& v) { c.power.gain_max = to_double(v); }},
      {"power.total_power", [](RunConfig& c, const std::string& v) { c.power.total_power = to_double(v); }},
      {"power.encode_floor", [](RunConfig& c, const std::string& v) { c.power.encode_floor = to_double(v); }},
      {"power.gains",
       [](RunConfig& c, const std::string& v) {
         const auto g = to_doubles(v);
         c.power.fixed_gains = Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(g.size()));
         c.power.channels = g.size();
       }},

      {"contract.alpha1", [](RunConfig& c, const std::string& v) { c.contract.alpha1 = to_double(v); }},
      {"contract.alpha2", [](RunConfig& c, const std::string& v) { c.contract.alpha2 = to_double(v); }},
      {"contract.beta1", [](RunConfig& c, const std::string& v) { c.contract.beta1 = to_double(v); }},
      {"contract.beta2", [](RunConfig& c, const std::string& v) { c.contract.beta2 = to_double(v); }},
      {"contract.utility_threshold",
       [](RunConfig& c, const std::string& v) { c.contract.utility_threshold = to_double(v); }},
      {"contract.penalty", [](RunConfig& c, const std::string& v) { c.contract.penalty = to_double(v); }},
      {"contract.latency_floor", [](RunConfig& c, const std::string& v) { c.contract.latency_floor = to_double(v); }},
      {"contract.reward_max", [](RunConfig& c, const std::string& v) { c.contract.reward_max = to_double(v); }},
      {"contract.grid_points", [](RunConfig& c, const std::string& v) { c.contract.grid_points = to_count(v); }},

      {"bandwidth.hops", [](RunConfig& c, const std::string& v) { c.bandwidth.hops = to_count(v); }},
      {"bandwidth.total_bandwidth",
       [](RunConfig& c, const std::string& v) { c.bandwidth.total_bandwidth = to_double(v); }},
      {"bandwidth.payload_lo", [](RunConfig& c, const std::string& v) { c.bandwidth.payload_lo = to_double(v); }},
      {"bandwidth.payload_hi", [](RunConfig& c, const std::string& v) { c.bandwidth.payload_hi = to_double(v); }},
      {"bandwidth.snr_db_lo", [](RunConfig& c, const std::string& v) { c.bandwidth.snr_db_lo = to_double(v); }},
      {"bandwidth.snr_db_hi", [](RunConfig& c, const std::string& v) { c.bandwidth.snr_db_hi = to_double(v); }},
      {"bandwidth.compute_lo", [](RunConfig& c, const std::string& v) { c.bandwidth.compute_lo = to_double(v); }},
      {"bandwidth.compute_hi", [](RunConfig& c, const std::string& v) { c.bandwidth.compute_hi = to_double(v); }},
      {"bandwidth.slack_lo", [](RunConfig& c, const std::string& v) { c.bandwidth.slack_lo = to_double(v); }},
      {"bandwidth.slack_hi", [](RunConfig& c, const std::string& v) { c.bandwidth.slack_hi = to_double(v); }},
      {"bandwidth.penalty", [](RunConfig& c, const std::string& v) { c.bandwidth.penalty = to_double(v); }},
      {"bandwidth.grid_step", [](RunConfig& c, const std::string& v) { c.bandwidth.grid_step = to_double(v); }},

      {"provider.capacities", [](RunConfig& c, const std::string& v) { c.provider.capacities = to_doubles(v); }},
      {"provider.qualities", [](RunConfig& c, const std::string& v) { c.provider.qualities = to_doubles(v); }},
      {"provider.horizon", [](RunConfig& c, const std::string& v) { c.provider.horizon = static_cast<int>(to_int(v)); }},
      {"provider.task_lo", [](RunConfig& c, const std::string& v) { c.provider.task_lo = to_double(v); }},
      {"provider.task_hi", [](RunConfig& c, const std::string& v) { c.provider.task_hi = to_double(v); }},
      {"provider.duration_lo",
       [](RunConfig& c, const std::string& v) { c.provider.duration_lo = static_cast<int>(to_int(v)); }},
      {"provider.duration_hi",
       [](RunConfig& c, const std::string& v) { c.provider.duration_hi = static_cast<int>(to_int(v)); }},
      {"provider.crash_penalty", [](RunConfig& c, const std::string& v) { c.provider.crash_penalty = to_double(v); }},

      {"cartpole.gravity", [](RunConfig& c, const std::string& v) { c.cartpole.gravity = to_double(v); }},
      {"cartpole.max_steps",
       [](RunConfig& c, const std::string& v) { c.cartpole.max_steps = static_cast<int>(to_int(v)); }},

      {"constant.actions", [](RunConfig& c, const std::string& v) { c.constant.actions = to_count(v); }},
      {"constant.horizon",
       [](RunConfig& c, const std::string& v) { c.constant.horizon = static_cast<int>(to_int(v)); }},
      {"constant.reward", [](RunConfig& c, const std::string& v) { c.constant.reward = to_double(v); }},

      {"gdm.epochs", [](RunConfig& c, const std::string& v) { c.gdm.epochs = to_int(v); }},
      {"gdm.batch", [](RunConfig& c, const std::string& v) { c.gdm.batch = to_count(v); }},
      {"gdm.actor_lr", [](RunConfig& c, const std::string& v) { c.gdm.actor_lr = to_double(v); }},
      {"gdm.critic_lr", [](RunConfig& c, const std::string& v) { c.gdm.critic_lr = to_double(v); }},
      {"gdm.actor_delay", [](RunConfig& c, const std::string& v) { c.gdm.actor_delay = to_int(v); }},
      {"gdm.reward_scale", [](RunConfig& c, const std::string& v) { c.gdm.reward_scale = to_double(v); }},
      {"gdm.steps", [](RunConfig& c, const std::string& v) { c.gdm.steps = static_cast<int>(to_int(v)); }},
      {"gdm.schedule", [](RunConfig& c, const std::string& v) { c.gdm.schedule = to_schedule(v); }},
      {"gdm.beta_min", [](RunConfig& c, const std::string& v) { c.gdm.beta_min = to_double(v); }},
      {"gdm.beta_max", [](RunConfig& c, const std::string& v) { c.gdm.beta_max = to_double(v); }},
      {"gdm.actor_hidden", [](RunConfig& c, const std::string& v) { c.gdm.actor_hidden = to_counts(v); }},
      {"gdm.critic_hidden", [](RunConfig& c, const std::string& v) { c.gdm.critic_hidden = to_counts(v); }},
      {"gdm.activation", [](RunConfig& c, const std::string& v) { c.gdm.activation = to_activation(v); }},
      {"gdm.sigma", [](RunConfig& c, const std::string& v) { c.gdm.sigma = to_double(v); }},
      {"gdm.sigma_decay", [](RunConfig& c, const std::string& v) { c.gdm.sigma_decay = to_double(v); }},
      {"gdm.sigma_floor", [](RunConfig& c, const std::string& v) { c.gdm.sigma_floor = to_double(v); }},
      {"gdm.buffer", [](RunConfig& c, const std::string& v) { c.gdm.buffer_capacity = to_count(v); }},
      {"gdm.critic_updates",
       [](RunConfig& c, const std::string& v) { c.gdm.critic_updates = static_cast<int>(to_int(v)); }},
      {"gdm.actor_updates",
       [](RunConfig& c, const std::string& v) { c.gdm.actor_updates = static_cast<int>(to_int(v)); }},
      {"gdm.eval_every", [](RunConfig& c, const std::string& v) { c.gdm.eval_every = to_int(v); }},
      {"gdm.eval_states", [](RunConfig& c, const std::string& v) { c.gdm.eval_states = to_count(v); }},
      {"expert.dataset_size", [](RunConfig& c, const std::string& v) { c.expert_dataset = to_count(v); }},

      {"d2sac.total_steps", [](RunConfig& c, const std::string& v) { c.d2sac.total_steps = to_int(v); }},
      {"d2sac.batch", [](RunConfig& c, const std::string& v) { c.d2sac.batch = to_count(v); }},
      {"d2sac.buffer", [](RunConfig& c, const std::string& v) { c.d2sac.buffer_capacity = to_count(v); }},
      {"d2sac.actor_lr", [](RunConfig& c, const std::string& v) { c.d2sac.actor_lr = to_double(v); }},
      {"d2sac.critic_lr", [](RunConfig& c, const std::string& v) { c.d2sac.critic_lr = to_double(v); }},
      {"d2sac.steps", [](RunConfig& c, const std::string& v) { c.d2sac.steps = static_cast<int>(to_int(v)); }},
      {"d2sac.schedule", [](RunConfig& c, const std::string& v) { c.d2sac.schedule = to_schedule(v); }},
      {"d2sac.beta_min", [](RunConfig& c, const std::string& v) { c.d2sac.beta_min = to_double(v); }},
      {"d2sac.beta_max", [](RunConfig& c, const std::string& v) { c.d2sac.beta_max = to_double(v); }},
      {"d2sac.temperature", [](RunConfig& c, const std::string& v) { c.d2sac.temperature = to_double(v); }},
      {"d2sac.actor_hidden", [](RunConfig& c, const std::string& v) { c.d2sac.actor_hidden = to_counts(v); }},
      {"d2sac.critic_hidden", [](RunConfig& c, const std::string& v) { c.d2sac.critic_hidden = to_counts(v); }},
      {"d2sac.activation", [](RunConfig& c, const std::string& v) { c.d2sac.activation = to_activation(v); }},
      {"d2sac.gamma", [](RunConfig& c, const std::string& v) { c.d2sac.critic.gamma = to_double(v); }},
      {"d2sac.tau", [](RunConfig& c, const std::string& v) { c.d2sac.critic.tau = to_double(v); }},
      {"d2sac.entropy", [](RunConfig& c, const std::string& v) { c.d2sac.critic.entropy_coef = to_double(v); }},
      {"d2sac.warmup_steps", [](RunConfig& c, const std::string& v) { c.d2sac.warmup_steps = to_int(v); }},
      {"d2sac.update_every",
       [](RunConfig& c, const std::string& v) { c.d2sac.update_every = static_cast<int>(to_int(v)); }},
      {"d2sac.updates_per_round",
       [](RunConfig& c, const std::string& v) { c.d2sac.updates_per_round = static_cast<int>(to_int(v)); }},
      {"d2sac.eval_every", [](RunConfig& c, const std::string& v) { c.d2sac.eval_every = to_int(v); }},
      {"d2sac.eval_episodes", [](RunConfig& c, const std::string& v) { c.d2sac.eval_episodes = to_count(v); }},
      {"d2sac.keep_best", [](RunConfig& c, const std::string& v) { c.d2sac.keep_best = to_bool(v); }},

      {"baseline.kind",
       [](RunConfig& c, const std::string& v) {
         if (v != "average" && v != "random" && v != "greedy") bad("expects average, random or greedy, got '" + v + "'");
         c.baseline = v;
       }},
      {"baseline.samples", [](RunConfig& c, const std::string& v) { c.baseline_samples = to_count(v); }},
  };
  return table;
}

bool has_entry(const RunConfig& cfg, std::string_view key) {
  return std::any_of(cfg.entries.begin(), cfg.entries.end(), [&](const auto& e) { return e.first == key; });
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kGdmOnline: return "gdm-online";
    case Algorithm::kGdmExpert: return "gdm-expert";
    case Algorithm::kD2sac: return "d2sac";
    case Algorithm::kBaseline: return "baseline";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kGdmOnline, Algorithm::kGdmExpert, Algorithm::kD2sac, Algorithm::kBaseline}) {
    if (algorithm_name(a) == name) return a;
  }
  return std::nullopt;
}

bool RunConfig::is_bandit_env() const { return env == "power" || env == "contract" || env == "bandwidth"; }

bool RunConfig::is_mdp_env() const { return env == "provider" || env == "cartpole" || env == "constant"; }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key.starts_with("sweep.")) {
    const std::string target = key.substr(6);
    if (!setters().contains(target)) bad("unknown sweep key '" + target + "'");
    // Points share one env/algorithm pairing and one output root.
    if (target == "env" || target == "algorithm" || target == "output_dir") bad("cannot sweep '" + target + "'");
    auto values = split_list(value, '|');
    for (const auto& v : values) {
      RunConfig probe = cfg;
      try {
        setters().at(target)(probe, v);
      } catch (const Error& e) {
        bad("key '" + key + "' " + e.detail());
      }
    }
    auto it = std::find_if(cfg.sweep.begin(), cfg.sweep.end(), [&](const auto& s) { return s.first == target; });
    if (it != cfg.sweep.end()) {
      it->second = std::move(values);
    } else {
      cfg.sweep.emplace_back(target, std::move(values));
    }
    return;
  }
  const auto it = setters().find(key);
  if (it == setters().end()) bad("unknown key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const Error& e) {
    bad("key '" + key + "' " + e.detail());
  }
  auto e = std::find_if(cfg.entries.begin(), cfg.entries.end(), [&](const auto& kv) { return kv.first == key; });
  if (e != cfg.entries.end()) {
    e->second = value;
  } else {
    cfg.entries.emplace_back(key, value);
  }
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string prefix = std::string(source) + ":" + std::to_string(lineno) + ": ";
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfig, prefix + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::kConfig, prefix + "missing key before '='");
    if (value.empty()) throw Error(ErrorCode::kConfig, prefix + "key '" + key + "' has no value");
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw Error(ErrorCode::kConfig, prefix + "duplicate key '" + key + "'");
    }
    seen.push_back(key);
    try {
      apply_setting(cfg, key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, prefix + e.detail());
    }
  }
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string(source) + ": " + e.detail());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path), path.string()); }

RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries) {
  RunConfig cfg;
  for (const auto& [k, v] : entries) apply_setting(cfg, k, v);
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  for (const char* key : {"env", "algorithm", "seed"}) {
    if (!has_entry(cfg, key)) bad(std::string("missing required field '") + key + "'");
  }
  if (!cfg.is_bandit_env() && !cfg.is_mdp_env()) {
    bad("unknown env '" + cfg.env + "' (expected power, contract, bandwidth, provider, cartpole or constant)");
  }
  const std::string pairing = "algorithm '" + std::string(algorithm_name(cfg.algorithm)) + "' does not apply to env '" +
                              cfg.env + "'";
  switch (cfg.algorithm) {
    case Algorithm::kGdmOnline:
    case Algorithm::kGdmExpert:
      if (!cfg.is_bandit_env()) bad(pairing);
      cfg.gdm.validate();
      if (cfg.algorithm == Algorithm::kGdmExpert && cfg.expert_dataset == 0) bad("expert.dataset_size must be positive");
      break;
    case Algorithm::kD2sac:
      if (!cfg.is_mdp_env()) bad(pairing);
      cfg.d2sac.validate();
      break;
    case Algorithm::kBaseline:
      if (cfg.is_bandit_env() && cfg.baseline == "greedy") bad("baseline 'greedy' needs a sequential env");
      if (cfg.is_mdp_env() && cfg.baseline == "average") bad("baseline 'average' needs a one-shot env");
      break;
  }
  if (cfg.checkpoint_every < 0) bad("checkpoint_every must be >= 0");
  try {
    if (cfg.is_bandit_env()) {
      make_bandit_env(cfg);
    } else {
      make_mdp_env(cfg);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    bad("env '" + cfg.env + "': " + e.detail());
  }
}

std::unique_ptr<envs::BanditEnv> make_bandit_env(const RunConfig& cfg) {
  if (cfg.env == "power") return std::make_unique<envs::PowerEnv>(cfg.power);
  if (cfg.env == "contract") return std::make_unique<envs::ContractEnv>(cfg.contract);
  if (cfg.env == "bandwidth") return std::make_unique<envs::BandwidthEnv>(cfg.bandwidth);
  bad("env '" + cfg.env + "' is not a one-shot optimization env");
}

std::unique_ptr<envs::MdpEnv> make_mdp_env(const RunConfig& cfg) {
  if (cfg.env == "provider") return std::make_unique<envs::ProviderEnv>(cfg.provider);
  if (cfg.env == "cartpole") return std::make_unique<envs::CartPoleEnv>(cfg.cartpole);
  if (cfg.env == "constant") return std::make_unique<envs::ConstantEnv>(cfg.constant);
  bad("env '" + cfg.env + "' is not a sequential env");
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries) out += k + " = " + v + "\n";
  for (const auto& [k, vs] : cfg.sweep) {
    out += "sweep." + k + " = ";
    for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? " | " : "") + vs[i];
    out += "\n";
  }
  return out;
}

}  // namespace gdmopt::harness
