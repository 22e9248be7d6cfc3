#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <thread>

#include "gdmopt/d2sac/replay_memory.hpp"
#include "gdmopt/error.hpp"

namespace gdmopt::d2sac {
namespace {

Transition tagged(int i) { return Transition{Vec::Constant(1, i), i, 0.0, Vec::Constant(1, i + 1), false}; }

TEST(ReplayMemory, EvictsOldestFirst) {
  ReplayMemory mem(3);
  for (int i = 0; i < 5; ++i) mem.push(tagged(i));
  const auto rows = mem.snapshot();
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].action, 2);
  EXPECT_EQ(rows[1].action, 3);
  EXPECT_EQ(rows[2].action, 4);
}

TEST(ReplayMemory, PendingRowsAreNeverSampled) {
  ReplayMemory mem(10);
  mem.push(tagged(0));
  const auto ticket = mem.push_pending(tagged(1));
  EXPECT_EQ(mem.size(), 2u);
  EXPECT_EQ(mem.ready(), 1u);
  Rng r(1);
  for (int i = 0; i < 50; ++i) {
    const auto s = mem.sample(2, r);
    ASSERT_EQ(s.size(), 1u);
    ASSERT_EQ(s[0].action, 0);
  }
  EXPECT_TRUE(mem.fill_reward(ticket, 7.5));
  EXPECT_FALSE(mem.fill_reward(ticket, 1.0));  // no longer pending
  EXPECT_EQ(mem.ready(), 2u);
  EXPECT_EQ(mem.snapshot()[1].reward, 7.5);
}

TEST(ReplayMemory, FillAfterEvictionReportsFalse) {
  ReplayMemory mem(2);
  const auto ticket = mem.push_pending(tagged(0));
  mem.push(tagged(1));
  mem.push(tagged(2));
  EXPECT_FALSE(mem.fill_reward(ticket, 1.0));
  EXPECT_EQ(mem.ready(), 2u);
}

TEST(ReplayMemory, SamplesDistinctRows) {
  ReplayMemory mem(100);
  for (int i = 0; i < 100; ++i) mem.push(tagged(i));
  Rng r(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = mem.sample(30, r);
    std::set<int> seen;
    for (const auto& t : s) seen.insert(t.action);
    ASSERT_EQ(seen.size(), 30u);
  }
  EXPECT_EQ(mem.sample(500, r).size(), 100u);
}

TEST(ReplayMemory, SamplingIsRoughlyUniform) {
  ReplayMemory mem(4);
  for (int i = 0; i < 4; ++i) mem.push(tagged(i));
  Rng r(3);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 8000; ++i) ++counts[static_cast<std::size_t>(mem.sample(1, r)[0].action)];
  for (int c : counts) EXPECT_NEAR(c, 2000, 3 * std::sqrt(8000 * 0.25 * 0.75));
}

TEST(ReplayMemory, InvalidUse) {
  EXPECT_THROW(ReplayMemory(0), Error);
  ReplayMemory mem(2);
  Rng r(1);
  EXPECT_THROW(mem.sample(1, r), Error);
  mem.push_pending(tagged(0));
  EXPECT_THROW(mem.sample(1, r), Error);
}

// Property: with random push / pending / fill sequences, the memory holds the
// newest `capacity` rows in order and `ready` counts the non-pending ones.
TEST(ReplayMemory, PropertyMatchesReferenceModel) {
  Rng r(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cap = 1 + static_cast<std::size_t>(r.uniform_int(0, 9));
    ReplayMemory mem(cap);
    std::vector<std::pair<int, bool>> model;  // (tag, pending), oldest first
    std::vector<std::pair<ReplayMemory::Ticket, int>> tickets;
    for (int op = 0; op < 40; ++op) {
      const int kind = r.uniform_int(0, 2);
      if (kind == 0 || (kind == 2 && tickets.empty())) {
        mem.push(tagged(op));
        model.emplace_back(op, false);
      } else if (kind == 1) {
        tickets.emplace_back(mem.push_pending(tagged(op)), op);
        model.emplace_back(op, true);
      } else {
        const auto [ticket, tag] = tickets.back();
        tickets.pop_back();
        auto it = std::find_if(model.begin(), model.end(), [&](const auto& m) { return m.first == tag; });
        ASSERT_EQ(mem.fill_reward(ticket, 1.0), it != model.end());
        if (it != model.end()) it->second = false;
      }
      if (model.size() > cap) model.erase(model.begin());
      const auto rows = mem.snapshot();
      ASSERT_EQ(rows.size(), model.size());
      std::size_t ready = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].action, model[i].first);
        ready += model[i].second ? 0 : 1;
      }
      ASSERT_EQ(mem.ready(), ready);
    }
  }
}

TEST(ReplayMemory, ConcurrentProducerAndLearner) {
  ReplayMemory mem(64);
  mem.push(tagged(-1));
  std::thread producer([&] {
    for (int i = 0; i < 5000; ++i) {
      const auto t = mem.push_pending(tagged(i));
      mem.fill_reward(t, 1.0);
    }
  });
  Rng r(5);
  std::size_t sampled = 0;
  for (int i = 0; i < 2000; ++i) {
    for (const auto& t : mem.sample(8, r)) {
      ASSERT_EQ(t.next_state(0), t.state(0) + 1);
      ++sampled;
    }
  }
  producer.join();
  EXPECT_GT(sampled, 0u);
  EXPECT_EQ(mem.size(), 64u);
  EXPECT_EQ(mem.ready(), 64u);
}

}  // namespace
}  // namespace gdmopt::d2sac
