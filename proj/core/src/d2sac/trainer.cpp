#include "gdmopt/d2sac/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "gdmopt/d2sac/replay_memory.hpp"
#include "gdmopt/error.hpp"

namespace gdmopt::d2sac {

namespace {

EpisodeSummary summarize(std::vector<double> returns) {
  EpisodeSummary s;
  s.episodes = returns.size();
  s.returns = std::move(returns);
  if (s.returns.empty()) return s;
  for (double r : s.returns) s.return_mean += r;
  s.return_mean /= static_cast<double>(s.episodes);
  double var = 0.0;
  for (double r : s.returns) var += (r - s.return_mean) * (r - s.return_mean);
  s.return_std = std::sqrt(var / static_cast<double>(s.episodes));
  return s;
}

}  // namespace

void D2sacConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::kConfig, what); };
  if (total_steps < 0) fail("total_steps must be >= 0");
  if (batch == 0 || buffer_capacity == 0) fail("batch and buffer capacity must be positive");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail("learning rates must be positive");
  if (steps < 1) fail("actor steps must be >= 1");
  if (!(temperature > 0.0)) fail("temperature must be positive");
  if (!(critic.gamma >= 0.0 && critic.gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(critic.tau > 0.0 && critic.tau <= 1.0)) fail("tau must lie in (0, 1]");
  if (!(critic.entropy_coef >= 0.0)) fail("entropy coefficient must be >= 0");
  if (warmup_steps < 0) fail("warmup_steps must be >= 0");
  if (update_every < 1 || updates_per_round < 0) fail("update cadence invalid");
  if (eval_every < 1) fail("eval_every must be >= 1");
}

D2sacModel make_d2sac_model(const envs::MdpEnv& env, const D2sacConfig& cfg, Rng& rng) {
  Rng actor_init = rng.split("actor");
  Rng critic_init = rng.split("critic");
  return D2sacModel{
      DiffusionActor::create(env.state_dim(), env.num_actions(), cfg.steps, cfg.actor_hidden, cfg.activation,
                             cfg.schedule, cfg.beta_min, cfg.beta_max, actor_init, cfg.temperature),
      DoubleCritic::create(env.state_dim(), env.num_actions(), cfg.critic_hidden, cfg.activation, critic_init,
                           cfg.critic)};
}

EpisodeSummary evaluate_policy(const envs::Policy& policy, const envs::MdpEnv& env, std::size_t episodes,
                               const Rng& rng) {
  std::vector<double> returns;
  returns.reserve(episodes);
  for (std::size_t i = 0; i < episodes; ++i) {
    auto e = env.clone();
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    returns.push_back(envs::run_episode(*e, policy, r));
  }
  return summarize(std::move(returns));
}

EpisodeSummary evaluate_greedy(const DiffusionActor& actor, const envs::MdpEnv& env, std::size_t episodes,
                               const Rng& rng) {
  Rng unused(0);
  return evaluate_policy([&](const Vec& s) { return actor.act(s, unused, ActMode::kGreedy); }, env, episodes, rng);
}

D2sacTrainResult train_mdp(const envs::MdpEnv& env_proto, const D2sacConfig& cfg, Rng& rng,
                           const D2sacHooks& hooks) {
  cfg.validate();
  Rng init_rng = rng.split("init");
  Rng env_rng = rng.split("env");
  Rng act_rng = rng.split("act");
  Rng replay_rng = rng.split("replay");
  Rng learn_rng = rng.split("learn");
  const Rng eval_rng = rng.split("eval");

  D2sacModel model = make_d2sac_model(env_proto, cfg, init_rng);
  std::optional<D2sacModel> best;
  double best_return = -std::numeric_limits<double>::infinity();
  std::int64_t best_epoch = 0;

  nn::AdamState actor_opt =
      nn::AdamState::for_params(model.actor.denoiser().net(), {.learning_rate = cfg.actor_lr});
  nn::AdamState opt1 = nn::AdamState::for_params(model.critic.q1, {.learning_rate = cfg.critic_lr});
  nn::AdamState opt2 = nn::AdamState::for_params(model.critic.q2, {.learning_rate = cfg.critic_lr});
  ReplayMemory memory(cfg.buffer_capacity);

  const auto start = std::chrono::steady_clock::now();
  std::vector<MetricsRow> rows;
  std::optional<double> last_actor;
  std::optional<double> last_critic;
  double returns_since_eval = 0.0;
  std::size_t episodes_since_eval = 0;

  auto env = env_proto.clone();
  Vec state = env->reset(env_rng);
  double episode_return = 0.0;

  for (std::int64_t t = 1; t <= cfg.total_steps; ++t) {
    const int action = t <= cfg.warmup_steps ? act_rng.uniform_int(0, static_cast<int>(env->num_actions()) - 1)
                                             : model.actor.act(state, act_rng, ActMode::kSample);
    envs::StepResult r = env->step(action, env_rng);
    if (!std::isfinite(r.reward) || !r.state.allFinite()) {
      throw Error(ErrorCode::kNonFinite, "environment step returned a non-finite value at step " + std::to_string(t));
    }
    episode_return += r.reward;
    memory.push(Transition{state, action, r.reward, r.state, r.terminal});
    if (r.done()) {
      returns_since_eval += episode_return;
      ++episodes_since_eval;
      episode_return = 0.0;
      state = env->reset(env_rng);
    } else {
      state = std::move(r.state);
    }

    if (t > cfg.warmup_steps && t % cfg.update_every == 0) {
      for (int u = 0; u < cfg.updates_per_round; ++u) {
        const auto batch = memory.sample(cfg.batch, replay_rng);
        const CriticLosses cl = critic_update(model.critic, model.actor, batch, opt1, opt2, learn_rng);
        last_critic = 0.5 * (cl.q1 + cl.q2);
        last_actor = actor_update(model.actor, model.critic, batch, actor_opt, learn_rng);
      }
    }

    if (t % cfg.eval_every == 0) {
      const EpisodeSummary s =
          evaluate_greedy(model.actor, env_proto, cfg.eval_episodes, eval_rng.split(static_cast<std::uint64_t>(t)));
      MetricsRow row;
      row.epoch = t;
      row.reward_mean = s.return_mean;
      row.reward_std = s.return_std;
      row.actor_loss = last_actor;
      row.critic_loss = last_critic;
      if (episodes_since_eval > 0) row.episode_return = returns_since_eval / static_cast<double>(episodes_since_eval);
      if (cfg.record_wall_clock) {
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      returns_since_eval = 0.0;
      episodes_since_eval = 0;
      rows.push_back(row);
      if (cfg.keep_best && s.return_mean > best_return) {
        best_return = s.return_mean;
        best_epoch = t;
        best = model;
      }
      if (hooks.on_eval) hooks.on_eval(row, model);
    }
  }

  D2sacTrainResult out{best && cfg.keep_best ? std::move(*best) : std::move(model), std::move(rows), 0};
  out.best_epoch = cfg.keep_best && best ? best_epoch : cfg.total_steps;
  return out;
}

}  // namespace gdmopt::d2sac
