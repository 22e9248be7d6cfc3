#pragma once

#include <cstdint>
#include <mutex>
#include <vector>

#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::d2sac {

struct Transition {
  Vec state;
  int action = 0;
  double reward = 0.0;
  Vec next_state;
  bool terminal = false;
};

// Ring buffer of transitions with strict FIFO eviction. A row may be inserted
// before its reward is known and patched later; pending rows are never
// sampled. All methods are internally serialized, so one producer and one
// learner may share an instance.
class ReplayMemory {
 public:
  using Ticket = std::uint64_t;  // insertion sequence number

  explicit ReplayMemory(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  std::size_t ready() const;  // rows eligible for sampling

  Ticket push(Transition t);
  Ticket push_pending(Transition t);
  // False when the row has already been evicted or was not pending.
  bool fill_reward(Ticket ticket, double reward);

  // min(k, ready()) distinct ready rows, uniformly without replacement.
  std::vector<Transition> sample(std::size_t k, Rng& rng) const;
  // All rows, oldest first.
  std::vector<Transition> snapshot() const;

 private:
  struct Row {
    Transition t;
    Ticket ticket = 0;
    bool pending = false;
  };

  Ticket insert(Transition t, bool pending);

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::vector<Row> rows_;
  std::size_t head_ = 0;  // oldest row once full
  Ticket next_ticket_ = 0;
  std::size_t pending_ = 0;
};

}  // namespace gdmopt::d2sac
