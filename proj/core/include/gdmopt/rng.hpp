#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gdmopt {

// Seeded random stream. Every consumer of randomness receives one of these;
// nothing in the library reads the wall clock or a global generator.
//
// split(name) derives an independent child stream from this stream's seed and
// a name, without advancing this stream. Components that draw from their own
// named child can change how much they consume without shifting anyone else.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::string_view name) const;
  Rng split(std::uint64_t index) const;

  double normal();
  double uniform(double lo, double hi);
  double uniform01();
  // Inclusive on both ends.
  int uniform_int(int lo, int hi);
  std::uint64_t next_u64();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// k distinct indices drawn uniformly from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace gdmopt
