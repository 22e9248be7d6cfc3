#pragma once

#include <cstddef>
#include <vector>

#include "gdmopt/error.hpp"
#include "gdmopt/rng.hpp"

namespace gdmopt::gdm {

// Fixed-capacity FIFO: once full, each push evicts the oldest item.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "replay buffer capacity must be positive");
    items_.reserve(capacity);
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  // i-th oldest item.
  const T& at(std::size_t i) const {
    if (i >= items_.size()) throw Error(ErrorCode::kOutOfRange, "replay buffer index out of range");
    return items_[(head_ + i) % items_.size()];
  }

  // min(k, size) distinct items, uniformly without replacement.
  std::vector<T> sample(std::size_t k, Rng& rng) const {
    if (items_.empty()) throw Error(ErrorCode::kEmptyBatch, "cannot sample an empty replay buffer");
    const auto idx = sample_without_replacement(items_.size(), std::min(k, items_.size()), rng);
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(items_[i]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest item once full
  std::vector<T> items_;
};

}  // namespace gdmopt::gdm
