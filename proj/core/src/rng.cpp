#include "gdmopt/rng.hpp"

#include <unordered_set>

#include "gdmopt/error.hpp"

namespace gdmopt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kStaleTape: return "stale tape";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kEmptyBatch: return "empty batch";
    case ErrorCode::kIntegrity: return "integrity error";
    case ErrorCode::kSchemaVersion: return "unsupported schema version";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "io error";
  }
  return "error";
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::string_view name) const { return Rng(mix_seed(seed_, fnv1a(name))); }

Rng Rng::split(std::uint64_t index) const { return Rng(mix_seed(seed_, splitmix64(index))); }

double Rng::normal() { return normal_(engine_); }

double Rng::uniform01() {
  // 53 random mantissa bits, in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw Error(ErrorCode::kInvalidArgument, "uniform_int: hi < lo");
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(engine_);
}

std::uint64_t Rng::next_u64() { return engine_(); }

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw Error(ErrorCode::kInvalidArgument, "cannot draw more distinct indices than the population");
  std::vector<std::size_t> out;
  out.reserve(k);
  if (2 * k > n) {
    // Dense draw: partial Fisher-Yates.
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n - i - 1)));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }
  std::unordered_set<std::size_t> seen;
  while (out.size() < k) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n - 1)));
    if (seen.insert(j).second) out.push_back(j);
  }
  return out;
}

}  // namespace gdmopt
