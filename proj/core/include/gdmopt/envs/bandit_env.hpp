#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::envs {

inline constexpr double kLogitClamp = 20.0;

struct OracleSolution {
  Vec solution;
  double reward = 0.0;
};

// One-shot optimization problem: draw a state, map an unconstrained logit
// vector to a feasible solution, score it. Implementations are immutable
// value objects; every method is const and safe to call concurrently.
class BanditEnv {
 public:
  virtual ~BanditEnv() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t solution_dim() const = 0;

  virtual Vec sample_state(Rng& rng) const = 0;

  // Features fed to the networks; same length as the state.
  virtual Vec condition(const Vec& state) const { return state; }

  // Feasible solution for (already clamped) logits.
  virtual Vec squash(const Vec& logits, const Vec& state) const = 0;
  // upstream^T * d squash / d logits.
  virtual Vec squash_vjp(const Vec& logits, const Vec& state, const Vec& upstream) const = 0;

  // Solutions are divided elementwise by this before reaching an evaluator
  // network, keeping its inputs O(1).
  virtual Vec solution_scale(const Vec& state) const;

  virtual double evaluate(const Vec& state, const Vec& solution) const = 0;

  virtual std::optional<OracleSolution> oracle(const Vec& /*state*/) const { return std::nullopt; }

  // A logit vector whose squash reproduces `solution` (to within the
  // encoding floor). Used to build expert datasets.
  virtual Vec encode(const Vec& solution, const Vec& state) const = 0;

  // Uniform feasible split; for box-shaped envs the box centre.
  virtual Vec average_solution(const Vec& state) const;
  virtual Vec random_solution(const Vec& state, Rng& rng) const = 0;
};

Vec clamp_logits(const Vec& logits);

// squash(clamp(logits)), the only path by which chain output reaches an env.
Vec execute(const BanditEnv& env, const Vec& logits, const Vec& state);
// VJP of execute: zero where the clamp is active.
Vec execute_vjp(const BanditEnv& env, const Vec& logits, const Vec& state, const Vec& upstream);

// Shared squash for simplex-constrained envs: budget * softmax(logits).
Vec simplex_squash(const Vec& logits, double budget);
Vec simplex_squash_vjp(const Vec& logits, double budget, const Vec& upstream);
// Centred log-shares, with shares floored at `floor` before the log.
Vec simplex_encode(const Vec& solution, double budget, double floor);
// Uniform draw from the budget-scaled simplex.
Vec simplex_random(std::size_t dim, double budget, Rng& rng);

}  // namespace gdmopt::envs
