#include "gdmopt/envs/bandwidth.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "gdmopt/error.hpp"

namespace gdmopt::envs {

namespace {

double log2p1(double x) { return std::log2(1.0 + x); }

}  // namespace

BandwidthState BandwidthState::from(const Vec& state, std::size_t hops) {
  const auto H = static_cast<Eigen::Index>(hops);
  if (state.size() != 3 * H + 1) throw Error(ErrorCode::kDimensionMismatch, "bandwidth state length != 3H + 1");
  BandwidthState s;
  s.payload = state.segment(0, H);
  s.snr = state.segment(H, H);
  s.compute = state.segment(2 * H, H);
  s.deadline = state(3 * H);
  if (!(s.payload.array() > 0.0).all() || !(s.snr.array() > 0.0).all() || !(s.compute.array() > 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth state entries must be positive");
  }
  return s;
}

Vec BandwidthState::to_vec() const {
  const auto H = payload.size();
  Vec v(3 * H + 1);
  v << payload, snr, compute, deadline;
  return v;
}

BandwidthEnv::BandwidthEnv(BandwidthEnvConfig cfg) : cfg_(cfg) {
  if (cfg_.hops < 1) throw Error(ErrorCode::kInvalidArgument, "bandwidth env needs at least one hop");
  if (!(cfg_.total_bandwidth > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bandwidth env needs W_max > 0");
  if (!(cfg_.payload_lo > 0.0 && cfg_.payload_hi >= cfg_.payload_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth payload range invalid");
  }
  if (!(cfg_.compute_lo > 0.0 && cfg_.compute_hi >= cfg_.compute_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth compute range invalid");
  }
  if (!(cfg_.slack_lo > 1.0 && cfg_.slack_hi >= cfg_.slack_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth slack must exceed 1 so some split meets the deadline");
  }
  if (!(cfg_.grid_step > 0.0) || cfg_.grid_step * static_cast<double>(cfg_.hops) > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth grid step invalid");
  }
}

Vec BandwidthEnv::rates(const BandwidthState& s, const Vec& bandwidth) const {
  if (static_cast<std::size_t>(bandwidth.size()) != cfg_.hops) {
    throw Error(ErrorCode::kDimensionMismatch, "bandwidth split length != hops");
  }
  Vec r(bandwidth.size());
  for (Eigen::Index h = 0; h < r.size(); ++h) r(h) = bandwidth(h) * log2p1(s.snr(h));
  return r;
}

double BandwidthEnv::total_time(const BandwidthState& s, const Vec& bandwidth) const {
  const Vec r = rates(s, bandwidth);
  return s.compute.sum() + (s.payload.array() / r.array()).sum();
}

bool BandwidthEnv::meets_deadline(const Vec& state, const Vec& bandwidth) const {
  const BandwidthState s = BandwidthState::from(state, cfg_.hops);
  return total_time(s, bandwidth) <= s.deadline;
}

double BandwidthEnv::min_transmission_time(const BandwidthState& s) const {
  double root_sum = 0.0;
  for (Eigen::Index h = 0; h < s.payload.size(); ++h) root_sum += std::sqrt(s.payload(h) / log2p1(s.snr(h)));
  return root_sum * root_sum / cfg_.total_bandwidth;
}

Vec BandwidthEnv::sample_state(Rng& rng) const {
  const auto H = static_cast<Eigen::Index>(cfg_.hops);
  BandwidthState s;
  s.payload.resize(H);
  s.snr.resize(H);
  s.compute.resize(H);
  for (Eigen::Index h = 0; h < H; ++h) s.payload(h) = rng.uniform(cfg_.payload_lo, cfg_.payload_hi);
  for (Eigen::Index h = 0; h < H; ++h) s.snr(h) = std::pow(10.0, rng.uniform(cfg_.snr_db_lo, cfg_.snr_db_hi) / 10.0);
  for (Eigen::Index h = 0; h < H; ++h) s.compute(h) = rng.uniform(cfg_.compute_lo, cfg_.compute_hi);
  s.deadline = s.compute.sum() + min_transmission_time(s) * rng.uniform(cfg_.slack_lo, cfg_.slack_hi);
  return s.to_vec();
}

Vec BandwidthEnv::condition(const Vec& state) const {
  const BandwidthState s = BandwidthState::from(state, cfg_.hops);
  const auto H = static_cast<Eigen::Index>(cfg_.hops);
  Vec c(3 * H + 1);
  c.segment(0, H) = s.payload / cfg_.payload_hi;
  for (Eigen::Index h = 0; h < H; ++h) c(H + h) = 10.0 * std::log10(s.snr(h)) / cfg_.snr_db_hi;
  c.segment(2 * H, H) = s.compute / cfg_.compute_hi;
  // Tightness of the deadline: 1 means only the fastest split is feasible.
  c(3 * H) = min_transmission_time(s) / (s.deadline - s.compute.sum());
  return c;
}

Vec BandwidthEnv::squash(const Vec& logits, const Vec& /*state*/) const {
  return simplex_squash(logits, cfg_.total_bandwidth);
}

Vec BandwidthEnv::squash_vjp(const Vec& logits, const Vec& /*state*/, const Vec& upstream) const {
  return simplex_squash_vjp(logits, cfg_.total_bandwidth, upstream);
}

Vec BandwidthEnv::solution_scale(const Vec& /*state*/) const {
  return Vec::Constant(static_cast<Eigen::Index>(cfg_.hops), cfg_.total_bandwidth);
}

double BandwidthEnv::evaluate(const Vec& state, const Vec& solution) const {
  const BandwidthState s = BandwidthState::from(state, cfg_.hops);
  if (!(solution.array() > 0.0).all()) return cfg_.penalty;
  if (total_time(s, solution) > s.deadline) return cfg_.penalty;
  return rates(s, solution).array().log().sum();
}

std::optional<OracleSolution> BandwidthEnv::oracle(const Vec& state) const {
  const auto n = static_cast<int>(std::lround(1.0 / cfg_.grid_step));
  const int H = static_cast<int>(cfg_.hops);
  const double unit = cfg_.total_bandwidth / static_cast<double>(n);

  OracleSolution best{Vec::Constant(H, cfg_.total_bandwidth / H), -std::numeric_limits<double>::infinity()};
  Vec w(H);
  std::function<void(int, int)> visit = [&](int h, int remaining) {
    if (h == H - 1) {
      w(h) = unit * remaining;
      const double r = evaluate(state, w);
      if (r > best.reward) {
        best.reward = r;
        best.solution = w;
      }
      return;
    }
    const int reserve = H - 1 - h;  // one step for every later hop
    for (int k = 1; k <= remaining - reserve; ++k) {
      w(h) = unit * k;
      visit(h + 1, remaining - k);
    }
  };
  visit(0, n);
  return best;
}

Vec BandwidthEnv::encode(const Vec& solution, const Vec& /*state*/) const {
  return simplex_encode(solution, cfg_.total_bandwidth, cfg_.encode_floor);
}

Vec BandwidthEnv::random_solution(const Vec& /*state*/, Rng& rng) const {
  return simplex_random(cfg_.hops, cfg_.total_bandwidth, rng);
}

std::unique_ptr<BandwidthEnv> bandwidth_env(BandwidthEnvConfig cfg) { return std::make_unique<BandwidthEnv>(cfg); }

}  // namespace gdmopt::envs
