#include "gdmopt/envs/provider.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

double run_episode(MdpEnv& env, const Policy& policy, Rng& rng) {
  Vec state = env.reset(rng);
  double total = 0.0;
  while (true) {
    StepResult r = env.step(policy(state), rng);
    total += r.reward;
    if (r.done()) return total;
    state = std::move(r.state);
  }
}

ProviderEnv::ProviderEnv(ProviderEnvConfig cfg) : cfg_(std::move(cfg)) {
  const std::size_t K = cfg_.capacities.size();
  if (K < 2) throw Error(ErrorCode::kInvalidArgument, "provider env needs K >= 2");
  if (cfg_.qualities.size() != K) throw Error(ErrorCode::kInvalidArgument, "provider qualities must match K");
  for (std::size_t k = 0; k < K; ++k) {
    if (!(cfg_.capacities[k] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "provider capacities must be positive");
    if (!(cfg_.qualities[k] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "provider qualities must be positive");
  }
  if (cfg_.horizon < 1) throw Error(ErrorCode::kInvalidArgument, "provider horizon must be >= 1");
  if (!(cfg_.task_lo > 0.0 && cfg_.task_hi >= cfg_.task_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "provider task size range invalid");
  }
  if (!(cfg_.duration_lo >= 1 && cfg_.duration_hi >= cfg_.duration_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "provider task duration range invalid");
  }
  if (!cfg_.tasks.empty() && cfg_.tasks.size() < static_cast<std::size_t>(cfg_.horizon)) {
    throw Error(ErrorCode::kInvalidArgument, "provider fixed task list shorter than the horizon");
  }
  running_.resize(K);
}

ProviderTask ProviderEnv::draw_task(Rng& rng) {
  if (!cfg_.tasks.empty()) return cfg_.tasks.at(next_task_++);
  ProviderTask t;
  t.size = rng.uniform(cfg_.task_lo, cfg_.task_hi);
  t.duration = rng.uniform_int(cfg_.duration_lo, cfg_.duration_hi);
  return t;
}

double ProviderEnv::load(std::size_t k) const {
  double total = 0.0;
  for (const Running& r : running_.at(k)) total += r.size;
  return total;
}

Vec ProviderEnv::observe() const {
  const std::size_t K = cfg_.capacities.size();
  Vec s(static_cast<Eigen::Index>(K + 2));
  for (std::size_t k = 0; k < K; ++k) {
    s(static_cast<Eigen::Index>(k)) = (cfg_.capacities[k] - load(k)) / cfg_.capacities[k];
  }
  s(static_cast<Eigen::Index>(K)) = task_.size / cfg_.task_hi;
  s(static_cast<Eigen::Index>(K + 1)) = static_cast<double>(cfg_.horizon - t_) / cfg_.horizon;
  return s;
}

Vec ProviderEnv::reset(Rng& rng) {
  for (auto& r : running_) r.clear();
  t_ = 0;
  next_task_ = 0;
  done_ = false;
  task_ = draw_task(rng);
  return observe();
}

double ProviderEnv::immediate_reward(int action) const {
  if (action < 0 || static_cast<std::size_t>(action) >= cfg_.capacities.size()) {
    throw Error(ErrorCode::kOutOfRange, "provider action out of range");
  }
  const auto k = static_cast<std::size_t>(action);
  const double l = load(k);
  if (l + task_.size > cfg_.capacities[k]) return -cfg_.crash_penalty;
  return cfg_.qualities[k] * std::log1p(task_.size / (1.0 + l));
}

StepResult ProviderEnv::step(int action, Rng& rng) {
  if (done_) throw Error(ErrorCode::kInvalidArgument, "provider env stepped after the episode ended; call reset");
  StepResult r;
  r.reward = immediate_reward(action);
  const auto k = static_cast<std::size_t>(action);
  const bool crashed = load(k) + task_.size > cfg_.capacities[k];
  if (crashed) {
    running_[k].clear();
  } else {
    running_[k].push_back({task_.size, task_.duration});
  }

  for (auto& tasks : running_) {
    for (Running& t : tasks) --t.remaining;
    std::erase_if(tasks, [](const Running& t) { return t.remaining <= 0; });
  }
  ++t_;
  if (t_ >= cfg_.horizon) {
    done_ = true;
    r.terminal = true;
  } else if (!crashed) {
    task_ = draw_task(rng);
  }
  r.state = observe();
  return r;
}

std::unique_ptr<ProviderEnv> provider_env(std::size_t providers, std::vector<double> capacities,
                                          std::vector<double> qualities, int horizon) {
  if (capacities.size() != providers || qualities.size() != providers) {
    throw Error(ErrorCode::kInvalidArgument, "provider_env: capacities and qualities need K entries");
  }
  ProviderEnvConfig cfg;
  cfg.capacities = std::move(capacities);
  cfg.qualities = std::move(qualities);
  cfg.horizon = horizon;
  return std::make_unique<ProviderEnv>(std::move(cfg));
}

}  // namespace gdmopt::envs
