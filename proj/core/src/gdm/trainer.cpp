#include "gdmopt/gdm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "gdmopt/error.hpp"
#include "gdmopt/gdm/actor_loss.hpp"
#include "gdmopt/gdm/replay_buffer.hpp"
#include "gdmopt/nn/adam.hpp"

namespace gdmopt::gdm {

namespace {

// Runs body(i) for i in [0, n), striped over `threads` workers.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double mean_std(const std::vector<double>& v, double* std_out) {
  if (v.empty()) {
    *std_out = 0.0;
    return 0.0;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  *std_out = std::sqrt(var / static_cast<double>(v.size()));
  return mean;
}

class Clock {
 public:
  explicit Clock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  std::optional<double> elapsed_ms() const {
    if (!enabled_) return std::nullopt;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

void check_env(const envs::BanditEnv& env, const GdmModel& model) {
  if (model.denoiser.solution_dim() != env.solution_dim() || model.denoiser.condition_dim() != env.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "model dims do not match the environment");
  }
}

MetricsRow eval_row(std::int64_t epoch, const GdmModel& model, const envs::BanditEnv& env, const EvalSet& set,
                    const Rng& eval_rng, std::size_t threads) {
  const EvalSummary s = evaluate_policy(model, env, set, eval_rng.split(static_cast<std::uint64_t>(epoch)), threads);
  MetricsRow row;
  row.epoch = epoch;
  row.reward_mean = s.reward_mean;
  row.reward_std = s.reward_std;
  row.gap_mean = s.gap_mean;
  return row;
}

}  // namespace

void GdmTrainConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::kConfig, what); };
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch == 0) fail("batch must be positive");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail("learning rates must be positive");
  if (!(reward_scale > 0.0) || !std::isfinite(reward_scale)) fail("reward_scale must be positive and finite");
  if (steps < 1) fail("steps must be >= 1");
  if (!(sigma >= 0.0) || !(sigma_floor >= 0.0)) fail("exploration sigma must be >= 0");
  if (!(sigma_decay > 0.0 && sigma_decay <= 1.0)) fail("sigma_decay must lie in (0, 1]");
  if (buffer_capacity == 0) fail("buffer capacity must be positive");
  if (critic_updates < 0 || actor_updates < 0) fail("update counts must be >= 0");
  if (actor_delay < 0) fail("actor_delay must be >= 0");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (eval_threads == 0) fail("eval_threads must be >= 1");
}

GdmModel make_gdm_model(const envs::BanditEnv& env, const GdmTrainConfig& cfg, Rng& rng) {
  Rng actor_init = rng.split("denoiser");
  Rng critic_init = rng.split("evaluator");
  return GdmModel{
      diffusion::ConditionalDenoiser::create(env.solution_dim(), env.state_dim(), cfg.steps, cfg.actor_hidden,
                                             cfg.activation, actor_init),
      diffusion::NoiseSchedule::make(cfg.steps, cfg.schedule, cfg.beta_min, cfg.beta_max),
      SolutionEvaluator::create(env.state_dim(), env.solution_dim(), cfg.critic_hidden, cfg.activation, critic_init)};
}

InferResult infer(const GdmModel& model, const envs::BanditEnv& env, const Vec& state, Rng& rng) {
  InferResult r;
  r.logits = diffusion::sample_chain(model.denoiser, model.schedule, env.condition(state), rng);
  r.solution = envs::execute(env, r.logits, state);
  r.reward = env.evaluate(state, r.solution);
  return r;
}

EvalSet EvalSet::draw(const envs::BanditEnv& env, std::size_t count, Rng& rng, std::size_t threads) {
  EvalSet set;
  set.states.reserve(count);
  for (std::size_t i = 0; i < count; ++i) set.states.push_back(env.sample_state(rng));
  set.oracle.resize(count);
  parallel_for(count, threads, [&](std::size_t i) { set.oracle[i] = env.oracle(set.states[i]); });
  return set;
}

EvalSummary evaluate_policy(const GdmModel& model, const envs::BanditEnv& env, const EvalSet& set, const Rng& rng,
                            std::size_t threads) {
  check_env(env, model);
  EvalSummary s;
  s.count = set.states.size();
  s.rewards.assign(s.count, 0.0);
  parallel_for(s.count, threads, [&](std::size_t i) {
    Rng chain = rng.split(static_cast<std::uint64_t>(i));
    s.rewards[i] = infer(model, env, set.states[i], chain).reward;
  });
  s.reward_mean = mean_std(s.rewards, &s.reward_std);
  if (s.count == 0) return s;

  bool have_oracle = set.oracle.size() == s.count;
  for (const auto& o : set.oracle) have_oracle = have_oracle && o.has_value();
  if (have_oracle) {
    double gap = 0.0;
    double best = 0.0;
    for (std::size_t i = 0; i < s.count; ++i) {
      s.oracle_rewards.push_back(set.oracle[i]->reward);
      gap += set.oracle[i]->reward - s.rewards[i];
      best += set.oracle[i]->reward;
    }
    s.gap_mean = gap / static_cast<double>(s.count);
    s.oracle_mean = best / static_cast<double>(s.count);
  }
  return s;
}

GdmTrainResult train_online(const envs::BanditEnv& env, const GdmTrainConfig& cfg, Rng& rng,
                            const GdmHooks& hooks) {
  cfg.validate();
  Rng init_rng = rng.split("init");
  Rng env_rng = rng.split("env");
  Rng chain_rng = rng.split("chain");
  Rng explore_rng = rng.split("exploration");
  Rng replay_rng = rng.split("replay");
  Rng actor_rng = rng.split("actor");
  Rng eval_set_rng = rng.split("eval-states");
  const Rng eval_rng = rng.split("eval");

  GdmTrainResult out{make_gdm_model(env, cfg, init_rng), {}};
  GdmModel& m = out.model;
  SolutionEvaluator& q = *m.evaluator;

  nn::AdamState actor_opt = nn::AdamState::for_params(m.denoiser.net(), {.learning_rate = cfg.actor_lr});
  nn::AdamState critic_opt = nn::AdamState::for_params(q.net(), {.learning_rate = cfg.critic_lr});
  ReplayBuffer<BanditExperience> buffer(cfg.buffer_capacity);
  const EvalSet eval_set = EvalSet::draw(env, cfg.eval_states, eval_set_rng, cfg.eval_threads);
  const Clock clock(cfg.record_wall_clock);

  double sigma = cfg.sigma;
  std::optional<double> last_actor;
  std::optional<double> last_critic;
  const auto D = static_cast<Eigen::Index>(env.solution_dim());

  for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    BanditExperience e;
    e.state = env.sample_state(env_rng);
    e.condition = env.condition(e.state);
    const Vec x0 = diffusion::sample_chain(m.denoiser, m.schedule, e.condition, chain_rng);
    e.logits = x0;
    for (Eigen::Index i = 0; i < D; ++i) e.logits(i) += sigma * explore_rng.normal();
    e.solution = envs::execute(env, e.logits, e.state);
    e.scaled_solution = e.solution.cwiseQuotient(env.solution_scale(e.state));
    e.reward = env.evaluate(e.state, e.solution);
    if (!std::isfinite(e.reward)) {
      throw Error(ErrorCode::kNonFinite, "environment returned a non-finite reward at epoch " + std::to_string(epoch));
    }
    buffer.push(std::move(e));

    for (int u = 0; u < cfg.critic_updates; ++u) {
      const auto batch = buffer.sample(cfg.batch, replay_rng);
      nn::LossAndGrad lg = critic_loss(q, batch, cfg.reward_scale);
      nn::adam_step(q.mutable_net(), lg.grads, critic_opt);
      last_critic = lg.loss;
    }
    for (int u = 0; epoch > cfg.actor_delay && u < cfg.actor_updates; ++u) {
      const auto batch = buffer.sample(cfg.batch, replay_rng);
      std::vector<Vec> states;
      states.reserve(batch.size());
      for (const auto& b : batch) states.push_back(b.state);
      ActorLossResult al = actor_loss(m.denoiser, m.schedule, q, env, states, actor_rng);
      nn::adam_step(m.denoiser.mutable_net(), al.grads, actor_opt);
      last_actor = al.loss;
    }

    if (epoch % cfg.eval_every == 0) {
      MetricsRow row = eval_row(epoch, m, env, eval_set, eval_rng, cfg.eval_threads);
      row.actor_loss = last_actor;
      row.critic_loss = last_critic;
      row.sigma = sigma;
      row.wall_ms = clock.elapsed_ms();
      out.metrics.push_back(row);
      if (hooks.on_eval) hooks.on_eval(row, m);
    }
    sigma = std::max(cfg.sigma_floor, sigma * cfg.sigma_decay);
  }
  return out;
}

std::vector<diffusion::ExpertExample> make_expert_dataset(const envs::BanditEnv& env, std::size_t count, Rng& rng) {
  std::vector<diffusion::ExpertExample> data;
  data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec state = env.sample_state(rng);
    const auto best = env.oracle(state);
    if (!best) throw Error(ErrorCode::kInvalidArgument, "expert dataset needs an environment with an oracle");
    data.push_back({env.condition(state), env.encode(best->solution, state)});
  }
  return data;
}

GdmTrainResult train_expert(const envs::BanditEnv& env, std::span<const diffusion::ExpertExample> dataset,
                            const GdmTrainConfig& cfg, Rng& rng, const GdmHooks& hooks) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyBatch, "expert training needs a non-empty dataset");
  Rng init_rng = rng.split("init");
  Rng replay_rng = rng.split("replay");
  Rng draw_rng = rng.split("expert-noise");
  Rng eval_set_rng = rng.split("eval-states");
  const Rng eval_rng = rng.split("eval");

  GdmTrainResult out{make_gdm_model(env, cfg, init_rng), {}};
  GdmModel& m = out.model;
  m.evaluator.reset();

  nn::AdamState opt = nn::AdamState::for_params(m.denoiser.net(), {.learning_rate = cfg.actor_lr});
  const EvalSet eval_set = EvalSet::draw(env, cfg.eval_states, eval_set_rng, cfg.eval_threads);
  const Clock clock(cfg.record_wall_clock);
  std::optional<double> last_loss;

  std::vector<diffusion::ExpertExample> batch;
  for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto idx = sample_without_replacement(dataset.size(), std::min(cfg.batch, dataset.size()), replay_rng);
    batch.clear();
    for (std::size_t i : idx) batch.push_back(dataset[i]);
    nn::LossAndGrad lg = diffusion::expert_loss(m.denoiser, m.schedule, batch, draw_rng);
    nn::adam_step(m.denoiser.mutable_net(), lg.grads, opt);
    last_loss = lg.loss;

    if (epoch % cfg.eval_every == 0) {
      MetricsRow row = eval_row(epoch, m, env, eval_set, eval_rng, cfg.eval_threads);
      row.actor_loss = last_loss;
      row.wall_ms = clock.elapsed_ms();
      out.metrics.push_back(row);
      if (hooks.on_eval) hooks.on_eval(row, m);
    }
  }
  return out;
}

}  // namespace gdmopt::gdm
