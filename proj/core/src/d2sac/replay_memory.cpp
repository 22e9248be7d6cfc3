#include "gdmopt/d2sac/replay_memory.hpp"

#include <cmath>

#include "gdmopt/error.hpp"

namespace gdmopt::d2sac {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "replay memory capacity must be positive");
  rows_.reserve(capacity);
}

std::size_t ReplayMemory::size() const {
  std::lock_guard lock(mu_);
  return rows_.size();
}

std::size_t ReplayMemory::ready() const {
  std::lock_guard lock(mu_);
  return rows_.size() - pending_;
}

ReplayMemory::Ticket ReplayMemory::insert(Transition t, bool pending) {
  if (!pending && !std::isfinite(t.reward)) throw Error(ErrorCode::kNonFinite, "transition reward is not finite");
  std::lock_guard lock(mu_);
  Row row{std::move(t), next_ticket_++, pending};
  if (rows_.size() < capacity_) {
    rows_.push_back(std::move(row));
  } else {
    if (rows_[head_].pending) --pending_;
    rows_[head_] = std::move(row);
    head_ = (head_ + 1) % capacity_;
  }
  if (pending) ++pending_;
  return next_ticket_ - 1;
}

ReplayMemory::Ticket ReplayMemory::push(Transition t) { return insert(std::move(t), false); }

ReplayMemory::Ticket ReplayMemory::push_pending(Transition t) { return insert(std::move(t), true); }

bool ReplayMemory::fill_reward(Ticket ticket, double reward) {
  if (!std::isfinite(reward)) throw Error(ErrorCode::kNonFinite, "transition reward is not finite");
  std::lock_guard lock(mu_);
  const Ticket oldest = next_ticket_ - rows_.size();
  if (ticket < oldest || ticket >= next_ticket_) return false;
  // Tickets are consecutive, so the row sits at a fixed offset from the oldest.
  Row& row = rows_[(head_ + (ticket - oldest)) % rows_.size()];
  if (!row.pending) return false;
  row.t.reward = reward;
  row.pending = false;
  --pending_;
  return true;
}

std::vector<Transition> ReplayMemory::sample(std::size_t k, Rng& rng) const {
  std::lock_guard lock(mu_);
  std::vector<Transition> out;
  if (pending_ == 0) {
    if (rows_.empty()) throw Error(ErrorCode::kEmptyBatch, "no ready transitions to sample");
    for (std::size_t i : sample_without_replacement(rows_.size(), std::min(k, rows_.size()), rng)) {
      out.push_back(rows_[i].t);
    }
    return out;
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!rows_[i].pending) eligible.push_back(i);
  }
  if (eligible.empty()) throw Error(ErrorCode::kEmptyBatch, "no ready transitions to sample");
  for (std::size_t j : sample_without_replacement(eligible.size(), std::min(k, eligible.size()), rng)) {
    out.push_back(rows_[eligible[j]].t);
  }
  return out;
}

std::vector<Transition> ReplayMemory::snapshot() const {
  std::lock_guard lock(mu_);
  std::vector<Transition> out;
  out.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out.push_back(rows_[(head_ + i) % rows_.size()].t);
  return out;
}

}  // namespace gdmopt::d2sac
