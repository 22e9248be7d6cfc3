#pragma once

#include "gdmopt/envs/bandit_env.hpp"
#include "gdmopt/envs/mdp_env.hpp"

namespace gdmopt::envs {

// Uniform feasible split.
Vec average_alloc(const BanditEnv& env, const Vec& state);
// Uniform draw from the feasible set.
Vec random_alloc(const BanditEnv& env, const Vec& state, Rng& rng);

// Action with the largest immediate reward, found by stepping a clone of
// `env` once per action with a copy of `rng`. Ties go to the lowest index.
int greedy_provider(const MdpEnv& env, const Rng& rng);
int random_action(const MdpEnv& env, Rng& rng);

}  // namespace gdmopt::envs
