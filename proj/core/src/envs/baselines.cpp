#include "gdmopt/envs/baselines.hpp"

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

Vec average_alloc(const BanditEnv& env, const Vec& state) { return env.average_solution(state); }

Vec random_alloc(const BanditEnv& env, const Vec& state, Rng& rng) { return env.random_solution(state, rng); }

int greedy_provider(const MdpEnv& env, const Rng& rng) {
  const int A = static_cast<int>(env.num_actions());
  int best = 0;
  double best_reward = 0.0;
  for (int a = 0; a < A; ++a) {
    auto probe = env.clone();
    Rng probe_rng = rng;
    const double r = probe->step(a, probe_rng).reward;
    if (a == 0 || r > best_reward) {
      best = a;
      best_reward = r;
    }
  }
  return best;
}

int random_action(const MdpEnv& env, Rng& rng) { return rng.uniform_int(0, static_cast<int>(env.num_actions()) - 1); }

}  // namespace gdmopt::envs
