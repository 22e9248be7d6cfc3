#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "gdmopt/diffusion/chain.hpp"
#include "gdmopt/diffusion/denoiser.hpp"
#include "gdmopt/diffusion/schedule.hpp"
#include "gdmopt/envs/power.hpp"
#include "gdmopt/nn/mlp.hpp"
#include "gdmopt/rng.hpp"

namespace {

using gdmopt::Mat;
using gdmopt::Rng;
using gdmopt::Vec;
namespace nn = gdmopt::nn;
namespace diffusion = gdmopt::diffusion;

Mat random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

// Batched forward pass of a 2x64 tanh network, the denoiser shape used for
// power allocation.
void BM_MlpForward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  const nn::ParamSet net = nn::make_mlp({16, 64, 64, 5}, nn::Activation::kTanh, nn::Activation::kLinear, rng);
  const Mat x = random_matrix(16, batch, rng);
  for (auto _ : state) {
    Mat y = nn::forward(net, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(64)->Arg(256);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  const nn::ParamSet net = nn::make_mlp({16, 64, 64, 5}, nn::Activation::kTanh, nn::Activation::kLinear, rng);
  const Mat x = random_matrix(16, batch, rng);
  const Mat upstream = random_matrix(5, batch, rng);
  nn::GradSet grads = nn::GradSet::zeros_like(net);
  for (auto _ : state) {
    nn::ForwardTape tape;
    nn::forward(net, x, tape);
    grads.set_zero();
    Mat dx = nn::backward(net, tape, upstream, &grads);
    benchmark::DoNotOptimize(dx.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256);

// Full reverse chain over a batch; the cost grows linearly in T.
void BM_SampleChain(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  constexpr std::size_t kDim = 5;
  constexpr Eigen::Index kBatch = 64;
  Rng rng(3);
  const std::vector<std::size_t> hidden = {64, 64};
  const auto denoiser = diffusion::ConditionalDenoiser::create(kDim, kDim, steps, hidden, nn::Activation::kTanh, rng);
  const auto schedule = diffusion::NoiseSchedule::make(steps, diffusion::ScheduleKind::kVariancePreserving, 0.1, 2.0);
  const Mat conditions = random_matrix(kDim, kBatch, rng);
  for (auto _ : state) {
    Mat x0 = diffusion::sample_chain(denoiser, schedule, conditions, rng);
    benchmark::DoNotOptimize(x0.data());
  }
  state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_SampleChain)->Arg(3)->Arg(6)->Arg(12);

void BM_ChainBackward(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  constexpr std::size_t kDim = 5;
  constexpr Eigen::Index kBatch = 64;
  Rng rng(4);
  const std::vector<std::size_t> hidden = {64, 64};
  const auto denoiser = diffusion::ConditionalDenoiser::create(kDim, kDim, steps, hidden, nn::Activation::kTanh, rng);
  const auto schedule = diffusion::NoiseSchedule::make(steps, diffusion::ScheduleKind::kVariancePreserving, 0.1, 2.0);
  const Mat conditions = random_matrix(kDim, kBatch, rng);
  const auto noise = diffusion::draw_chain_noise(kDim, kBatch, steps, rng);
  const Mat grad_x0 = random_matrix(kDim, kBatch, rng);
  nn::GradSet grads = nn::GradSet::zeros_like(denoiser.net());
  for (auto _ : state) {
    diffusion::ChainTrace trace;
    diffusion::run_chain(denoiser, schedule, conditions, noise, &trace);
    grads.set_zero();
    Mat dx = diffusion::chain_backward(denoiser, schedule, trace, grad_x0, grads);
    benchmark::DoNotOptimize(dx.data());
  }
  state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_ChainBackward)->Arg(6);

void BM_WaterFilling(benchmark::State& state) {
  const auto channels = static_cast<Eigen::Index>(state.range(0));
  Rng rng(5);
  Vec gains(channels);
  for (Eigen::Index i = 0; i < channels; ++i) gains(i) = rng.uniform(0.5, 5.0);
  for (auto _ : state) {
    auto res = gdmopt::envs::water_filling(gains, 10.0);
    benchmark::DoNotOptimize(res.water_level);
  }
}
BENCHMARK(BM_WaterFilling)->Arg(3)->Arg(5)->Arg(71);

}  // namespace

BENCHMARK_MAIN();
