#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unistd.h>


namespace gdmopt::testing {

std::vector<double> numeric_gradient(nn::ParamSet& params, const std::function<double()>& f, double h) {
  std::vector<double> flat = params.flatten();
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double orig = flat[i];
    flat[i] = orig + h;
    params.assign(flat);
    const double up = f();
    flat[i] = orig - h;
    params.assign(flat);
    const double down = f();
    flat[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  params.assign(flat);
  return grad;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor) {
  double scale = floor;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return a.size() == b.size() ? worst / scale : INFINITY;
}

Vec random_vec(std::size_t n, Rng& rng, double lo, double hi) {
  Vec v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

Mat random_mat(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

namespace {

void grid_recurse(const Vec& gains, std::size_t m, long remaining, double step, Vec& p, GridBest& best) {
  const auto M = static_cast<std::size_t>(gains.size());
  if (m + 1 == M) {
    p(static_cast<Eigen::Index>(m)) = static_cast<double>(remaining) * step;
    double rate = 0.0;
    for (Eigen::Index i = 0; i < gains.size(); ++i) rate += std::log2(1.0 + gains(i) * p(i));
    if (rate > best.rate) {
      best.rate = rate;
      best.allocation = p;
    }
    return;
  }
  for (long k = 0; k <= remaining; ++k) {
    p(static_cast<Eigen::Index>(m)) = static_cast<double>(k) * step;
    grid_recurse(gains, m + 1, remaining - k, step, p, best);
  }
}

}  // namespace

GridBest grid_sum_rate(const Vec& gains, double total_power, double step) {
  GridBest best;
  best.rate = -INFINITY;
  Vec p = Vec::Zero(gains.size());
  const long units = std::lround(total_power / step);
  grid_recurse(gains, 0, units, total_power / static_cast<double>(units), p, best);
  return best;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("gdmopt-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace gdmopt::testing
