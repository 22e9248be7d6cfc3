#include "gdmopt/harness/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>

#include "gdmopt/envs/baselines.hpp"
#include "gdmopt/error.hpp"
#include "gdmopt/harness/metrics_csv.hpp"
#include "gdmopt/io.hpp"

namespace gdmopt::harness {

namespace {

using nlohmann::json;

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json schedule_json(const diffusion::NoiseSchedule& s) {
  return {{"kind", diffusion::schedule_kind_name(s.kind())},
          {"steps", s.steps()},
          {"beta_min", s.beta_min()},
          {"beta_max", s.beta_max()}};
}

diffusion::NoiseSchedule schedule_from(const json& j) {
  const auto kind = diffusion::parse_schedule_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::kIntegrity, "checkpoint names an unknown schedule kind");
  return diffusion::NoiseSchedule::make(j.at("steps").get<int>(), *kind, j.at("beta_min").get<double>(),
                                        j.at("beta_max").get<double>());
}

json base_metadata(const RunConfig& cfg, std::int64_t epoch) {
  json entries = json::array();
  for (const auto& [k, v] : cfg.entries) entries.push_back({k, v});
  return {{"format", "gdmopt-run"},
          {"algorithm", algorithm_name(cfg.algorithm)},
          {"env", cfg.env},
          {"epoch", epoch},
          {"config", entries}};
}

double mean_of(const std::vector<double>& v, double* std_out) {
  double m = 0.0;
  for (double x : v) m += x;
  m = v.empty() ? 0.0 : m / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  *std_out = v.empty() ? 0.0 : std::sqrt(var / static_cast<double>(v.size()));
  return m;
}

// Baseline scores: rewards (and oracle gaps, when available) over `count`
// states or episodes.
struct BaselineScore {
  std::vector<double> rewards;
  std::optional<double> gap_mean;
};

BaselineScore score_baseline(const RunConfig& cfg, std::size_t count, const Rng& rng) {
  BaselineScore out;
  if (cfg.is_bandit_env()) {
    const auto env = make_bandit_env(cfg);
    Rng states = rng.split("states");
    Rng pick = rng.split("pick");
    double gap = 0.0;
    bool have_oracle = true;
    for (std::size_t i = 0; i < count; ++i) {
      const Vec s = env->sample_state(states);
      const Vec p = cfg.baseline == "random" ? envs::random_alloc(*env, s, pick) : envs::average_alloc(*env, s);
      const double r = env->evaluate(s, p);
      out.rewards.push_back(r);
      const auto o = env->oracle(s);
      have_oracle = have_oracle && o.has_value();
      if (o) gap += o->reward - r;
    }
    if (have_oracle && count > 0) out.gap_mean = gap / static_cast<double>(count);
    return out;
  }
  const auto env = make_mdp_env(cfg);
  for (std::size_t i = 0; i < count; ++i) {
    auto e = env->clone();
    Rng ep = rng.split(static_cast<std::uint64_t>(i));
    Rng pick = ep.split("pick");
    envs::Policy policy;
    if (cfg.baseline == "greedy") {
      // The lookahead reuses the episode stream so the probe sees the same next task.
      policy = [&](const Vec&) { return envs::greedy_provider(*e, ep); };
    } else {
      policy = [&](const Vec&) { return envs::random_action(*e, pick); };
    }
    out.rewards.push_back(envs::run_episode(*e, policy, ep));
  }
  return out;
}

json summary_from_rows(const RunConfig& cfg, const std::vector<MetricsRow>& rows) {
  json s = {{"algorithm", algorithm_name(cfg.algorithm)}, {"env", cfg.env}, {"seed", cfg.seed}};
  s["evaluations"] = rows.size();
  if (!rows.empty()) {
    const MetricsRow& last = rows.back();
    s["final"] = {{"epoch", last.epoch},
                  {"reward_mean", opt(last.reward_mean)},
                  {"reward_std", opt(last.reward_std)},
                  {"gap_mean", opt(last.gap_mean)}};
  }
  return s;
}

}  // namespace

int exit_status_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfig: return kExitConfig;
    case ErrorCode::kNonFinite: return kExitNumeric;
    case ErrorCode::kIntegrity:
    case ErrorCode::kSchemaVersion: return kExitCheckpoint;
    default: return kExitFailure;
  }
}

RunPaths RunPaths::in(const std::filesystem::path& dir) {
  return RunPaths{dir, dir / "metrics.csv", dir / "checkpoint.gdm", dir / "summary.json"};
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

nn::Checkpoint make_checkpoint(const RunConfig& cfg, const gdm::GdmModel& model, std::int64_t epoch) {
  nn::Checkpoint c;
  c.seed = cfg.seed;
  c.metadata = base_metadata(cfg, epoch);
  c.metadata["schedule"] = schedule_json(model.schedule);
  c.networks.push_back({"denoiser", model.denoiser.net()});
  if (model.evaluator) c.networks.push_back({"evaluator", model.evaluator->net()});
  return c;
}

nn::Checkpoint make_checkpoint(const RunConfig& cfg, const d2sac::D2sacModel& model, std::int64_t epoch) {
  nn::Checkpoint c;
  c.seed = cfg.seed;
  c.metadata = base_metadata(cfg, epoch);
  c.metadata["schedule"] = schedule_json(model.actor.schedule());
  c.metadata["temperature"] = model.actor.temperature();
  c.networks.push_back({"actor", model.actor.denoiser().net()});
  c.networks.push_back({"critic1", model.critic.q1});
  c.networks.push_back({"critic2", model.critic.q2});
  c.networks.push_back({"target1", model.critic.target1});
  c.networks.push_back({"target2", model.critic.target2});
  return c;
}

RunConfig checkpoint_config(const nn::Checkpoint& ckpt) {
  if (ckpt.metadata.value("format", "") != "gdmopt-run") {
    throw Error(ErrorCode::kIntegrity, "checkpoint was not written by a gdmopt run");
  }
  std::vector<std::pair<std::string, std::string>> entries;
  try {
    for (const json& e : ckpt.metadata.at("config")) entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIntegrity, std::string("checkpoint config block is malformed: ") + e.what());
  }
  return config_from_entries(entries);
}

gdm::GdmModel gdm_model_from(const nn::Checkpoint& ckpt, const RunConfig& cfg) {
  const auto env = make_bandit_env(cfg);
  const diffusion::NoiseSchedule schedule = schedule_from(ckpt.metadata.at("schedule"));
  gdm::GdmModel m{diffusion::ConditionalDenoiser(ckpt.network("denoiser"), env->solution_dim(), env->state_dim(),
                                                 schedule.steps()),
                  schedule, std::nullopt};
  if (ckpt.has_network("evaluator")) {
    m.evaluator.emplace(ckpt.network("evaluator"), env->state_dim(), env->solution_dim());
  }
  return m;
}

d2sac::D2sacModel d2sac_model_from(const nn::Checkpoint& ckpt, const RunConfig& cfg) {
  const auto env = make_mdp_env(cfg);
  const diffusion::NoiseSchedule schedule = schedule_from(ckpt.metadata.at("schedule"));
  d2sac::DiffusionActor actor(
      diffusion::ConditionalDenoiser(ckpt.network("actor"), env->num_actions(), env->state_dim(), schedule.steps()),
      schedule, ckpt.metadata.value("temperature", 1.0));
  d2sac::DoubleCritic critic{ckpt.network("critic1"), ckpt.network("critic2"), ckpt.network("target1"),
                             ckpt.network("target2"), cfg.d2sac.critic};
  critic.validate();
  return d2sac::D2sacModel{std::move(actor), std::move(critic)};
}

TrainReport train(const RunConfig& cfg, const std::filesystem::path& dir) {
  validate(cfg);
  TrainReport report{RunPaths::in(dir), {}, {}};
  std::filesystem::create_directories(dir);
  Rng root(cfg.seed);
  const bool sequential = cfg.is_mdp_env();

  auto rolling = [&](std::int64_t epoch) { return cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0; };
  auto flush_metrics = [&] { write_metrics_csv(report.paths.metrics, report.metrics, sequential); };

  try {
    switch (cfg.algorithm) {
      case Algorithm::kGdmOnline:
      case Algorithm::kGdmExpert: {
        const auto env = make_bandit_env(cfg);
        gdm::GdmHooks hooks;
        hooks.on_eval = [&](const MetricsRow& row, const gdm::GdmModel& m) {
          report.metrics.push_back(row);
          if (rolling(row.epoch)) {
            nn::save_checkpoint(report.paths.checkpoint, make_checkpoint(cfg, m, row.epoch));
            flush_metrics();
          }
        };
        Rng train_rng = root.split("train");
        const gdm::GdmTrainResult res = [&] {
          if (cfg.algorithm == Algorithm::kGdmOnline) return gdm::train_online(*env, cfg.gdm, train_rng, hooks);
          Rng data_rng = root.split("expert-data");
          const auto data = gdm::make_expert_dataset(*env, cfg.expert_dataset, data_rng);
          return gdm::train_expert(*env, data, cfg.gdm, train_rng, hooks);
        }();
        nn::save_checkpoint(report.paths.checkpoint, make_checkpoint(cfg, res.model, cfg.gdm.epochs));
        break;
      }
      case Algorithm::kD2sac: {
        const auto env = make_mdp_env(cfg);
        d2sac::D2sacHooks hooks;
        hooks.on_eval = [&](const MetricsRow& row, const d2sac::D2sacModel& m) {
          report.metrics.push_back(row);
          if (rolling(row.epoch)) {
            nn::save_checkpoint(report.paths.checkpoint, make_checkpoint(cfg, m, row.epoch));
            flush_metrics();
          }
        };
        Rng train_rng = root.split("train");
        d2sac::D2sacTrainResult res = d2sac::train_mdp(*env, cfg.d2sac, train_rng, hooks);
        nn::save_checkpoint(report.paths.checkpoint, make_checkpoint(cfg, res.model, res.best_epoch));
        break;
      }
      case Algorithm::kBaseline: {
        const BaselineScore b = score_baseline(cfg, cfg.baseline_samples, root.split("baseline"));
        MetricsRow row;
        double sd = 0.0;
        row.reward_mean = mean_of(b.rewards, &sd);
        row.reward_std = sd;
        row.gap_mean = b.gap_mean;
        report.metrics.push_back(row);
        nn::Checkpoint c;
        c.seed = cfg.seed;
        c.metadata = base_metadata(cfg, 0);
        nn::save_checkpoint(report.paths.checkpoint, c);
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonFinite) {
      flush_metrics();
      const std::string where = std::filesystem::exists(report.paths.checkpoint)
                                    ? "last good checkpoint kept at " + report.paths.checkpoint.string()
                                    : "no checkpoint had been written yet";
      throw Error(ErrorCode::kNonFinite, "training aborted: " + e.detail() + "; " + where);
    }
    throw;
  }

  flush_metrics();
  report.summary = summary_from_rows(cfg, report.metrics);
  write_file_atomic(report.paths.summary, report.summary.dump(2) + "\n");
  return report;
}

json evaluate_checkpoint(const nn::Checkpoint& ckpt, std::size_t episodes, std::optional<std::uint64_t> seed) {
  const RunConfig cfg = checkpoint_config(ckpt);
  json out = {{"algorithm", algorithm_name(cfg.algorithm)}, {"env", cfg.env}, {"episodes", episodes}};
  if (episodes == 0) return out;
  const Rng rng = Rng(seed.value_or(ckpt.seed)).split("evaluate");

  switch (cfg.algorithm) {
    case Algorithm::kGdmOnline:
    case Algorithm::kGdmExpert: {
      const auto env = make_bandit_env(cfg);
      const gdm::GdmModel model = gdm_model_from(ckpt, cfg);
      Rng states = rng.split("states");
      const gdm::EvalSet set = gdm::EvalSet::draw(*env, episodes, states, cfg.gdm.eval_threads);
      const gdm::EvalSummary s = gdm::evaluate_policy(model, *env, set, rng.split("chain"), cfg.gdm.eval_threads);
      out["reward_mean"] = s.reward_mean;
      out["reward_std"] = s.reward_std;
      if (s.gap_mean) {
        out["gap_mean"] = *s.gap_mean;
        out["oracle_mean"] = *s.oracle_mean;
      }
      break;
    }
    case Algorithm::kD2sac: {
      const auto env = make_mdp_env(cfg);
      const d2sac::D2sacModel model = d2sac_model_from(ckpt, cfg);
      const d2sac::EpisodeSummary s = d2sac::evaluate_greedy(model.actor, *env, episodes, rng);
      out["reward_mean"] = s.return_mean;
      out["reward_std"] = s.return_std;
      break;
    }
    case Algorithm::kBaseline: {
      const BaselineScore b = score_baseline(cfg, episodes, rng);
      double sd = 0.0;
      out["reward_mean"] = mean_of(b.rewards, &sd);
      out["reward_std"] = sd;
      if (b.gap_mean) out["gap_mean"] = *b.gap_mean;
      break;
    }
  }
  return out;
}

json power_oracle(const std::vector<double>& gains, double total_power) {
  const Vec g = Eigen::Map<const Vec>(gains.data(), static_cast<Eigen::Index>(gains.size()));
  const envs::WaterFillingResult wf = envs::water_filling(g, total_power);
  return {{"env", "power"},
          {"gains", gains},
          {"total_power", total_power},
          {"allocation", to_json(wf.allocation)},
          {"rate", wf.rate},
          {"water_level", wf.water_level},
          {"active_channels", wf.active_channels}};
}

json sampled_oracle(const RunConfig& cfg, std::size_t count) {
  const auto env = make_bandit_env(cfg);
  Rng rng = Rng(cfg.seed).split("oracle");
  json items = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const Vec s = env->sample_state(rng);
    const auto o = env->oracle(s);
    if (!o) throw Error(ErrorCode::kInvalidArgument, "env '" + cfg.env + "' has no oracle");
    items.push_back({{"state", to_json(s)}, {"solution", to_json(o->solution)}, {"reward", o->reward}});
  }
  return {{"env", cfg.env}, {"seed", cfg.seed}, {"instances", items}};
}

json sweep(const RunConfig& cfg, const SweepGrid& extra, const std::filesystem::path& root, std::ostream& log) {
  SweepGrid grid = cfg.sweep;
  for (const auto& [k, vs] : extra) {
    RunConfig probe = cfg;
    std::string joined;
    for (std::size_t i = 0; i < vs.size(); ++i) joined += (i ? "|" : "") + vs[i];
    apply_setting(probe, "sweep." + k, joined);
    auto it = std::find_if(grid.begin(), grid.end(), [&](const auto& g) { return g.first == k; });
    if (it != grid.end()) {
      it->second = vs;
    } else {
      grid.emplace_back(k, vs);
    }
  }
  if (grid.empty()) throw Error(ErrorCode::kConfig, "sweep has no keys; declare sweep.<key> = a | b or pass --grid");

  std::size_t points = 1;
  for (const auto& [_, vs] : grid) points *= vs.size();

  std::filesystem::create_directories(root);
  std::string index = "point";
  for (const auto& [k, _] : grid) index += "," + k;
  index += ",status,final_epoch,reward_mean,gap_mean\n";
  json summary = {{"points", json::array()}};
  bool all_ok = true;

  for (std::size_t p = 0; p < points; ++p) {
    RunConfig point = cfg;
    point.sweep.clear();
    json settings = json::object();
    std::size_t rem = p;
    std::string row;
    char name[32];
    std::snprintf(name, sizeof(name), "point_%03zu", p);
    row += name;
    // Last key varies fastest.
    std::vector<std::string> chosen(grid.size());
    for (std::size_t k = grid.size(); k-- > 0;) {
      chosen[k] = grid[k].second[rem % grid[k].second.size()];
      rem /= grid[k].second.size();
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      apply_setting(point, grid[k].first, chosen[k]);
      settings[grid[k].first] = chosen[k];
      row += "," + chosen[k];
    }
    const std::filesystem::path dir = root / name;
    json entry = {{"point", name}, {"settings", settings}};
    try {
      log << "sweep " << name << " (" << (p + 1) << "/" << points << ")\n";
      const TrainReport r = train(point, dir);
      const MetricsRow* last = r.metrics.empty() ? nullptr : &r.metrics.back();
      auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", *v);
        return std::string(buf);
      };
      row += ",ok," + (last ? std::to_string(last->epoch) : std::string()) + "," +
             (last ? cell(last->reward_mean) : std::string()) + "," + (last ? cell(last->gap_mean) : std::string());
      entry["status"] = "ok";
      entry["summary"] = r.summary;
    } catch (const Error& e) {
      all_ok = false;
      row += ",failed,,,";
      entry["status"] = "failed";
      entry["error"] = e.what();
      log << "sweep " << name << " failed: " << e.what() << "\n";
    }
    index += row + "\n";
    summary["points"].push_back(entry);
  }
  write_file_atomic(root / "sweep.csv", index);
  write_file_atomic(root / "sweep.json", summary.dump(2) + "\n");
  summary["ok"] = all_ok;
  return summary;
}

}  // namespace gdmopt::harness
