#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gdmopt/nn/mlp.hpp"
#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::diffusion {

// Width of the sinusoidal step embedding for a T-step chain:
// 2 * ceil(log2(T) + 2).
std::size_t time_embedding_dim(int steps);

// Features sin(2^k * pi * t / (2T)), cos(2^k * pi * t / (2T)) for
// k = 0 .. dim/2 - 1, interleaved (sin, cos) per k.
Vec time_embedding(int t, int steps);

// Noise predictor eps(x_t, t, g). The network input is the concatenation
// [x_t (D) ; embed(t) (E) ; g (C)] and its output has D entries.
class ConditionalDenoiser {
 public:
  ConditionalDenoiser(nn::ParamSet net, std::size_t solution_dim, std::size_t condition_dim, int steps);

  static ConditionalDenoiser create(std::size_t solution_dim, std::size_t condition_dim, int steps,
                                    std::span<const std::size_t> hidden, nn::Activation activation, Rng& rng);

  std::size_t solution_dim() const { return solution_dim_; }
  std::size_t condition_dim() const { return condition_dim_; }
  std::size_t embedding_dim() const { return embedding_dim_; }
  int steps() const { return steps_; }

  const nn::ParamSet& net() const { return net_; }
  nn::ParamSet& mutable_net() { return net_; }

  Mat assemble_input(const Mat& x, int t, const Mat& conditions) const;
  Mat assemble_input(const Mat& x, std::span<const int> t, const Mat& conditions) const;

  Vec predict(const Vec& x, int t, const Vec& condition) const;
  Mat predict(const Mat& x, int t, const Mat& conditions) const;

 private:
  void check_batch(const Mat& x, std::size_t cols, const Mat& conditions) const;

  nn::ParamSet net_;
  std::size_t solution_dim_;
  std::size_t condition_dim_;
  std::size_t embedding_dim_;
  int steps_;
  std::vector<Vec> embeddings_;  // embeddings_[t - 1]
};

}  // namespace gdmopt::diffusion
