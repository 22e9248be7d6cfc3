#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string_view>

#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::envs {

struct StepResult {
  Vec state;
  double reward = 0.0;
  bool terminal = false;   // absorbing: no bootstrap past this step
  bool truncated = false;  // episode cut by a step cap; the state is not absorbing
  bool done() const { return terminal || truncated; }
};

// Sequential environment with a discrete action set. Instances are mutable and
// owned by one episode at a time; clone() copies the full dynamic state.
class MdpEnv {
 public:
  virtual ~MdpEnv() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t num_actions() const = 0;

  virtual Vec reset(Rng& rng) = 0;
  virtual StepResult step(int action, Rng& rng) = 0;
  virtual std::unique_ptr<MdpEnv> clone() const = 0;
};

using Policy = std::function<int(const Vec& state)>;

// Plays one episode from reset to done and returns the undiscounted return.
double run_episode(MdpEnv& env, const Policy& policy, Rng& rng);

}  // namespace gdmopt::envs
