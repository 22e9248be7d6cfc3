#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "gdmopt/error.hpp"
#include "gdmopt/harness/metrics_csv.hpp"
#include "test_support.hpp"

namespace gdmopt::harness {
namespace {

TEST(MetricsCsv, HeaderAndEmptyCells) {
  MetricsRow row;
  row.epoch = 10;
  row.reward_mean = 1.5;
  row.gap_mean = 0.25;
  const std::string text = format_metrics_csv({row}, false);
  EXPECT_EQ(text,
            "# metrics_schema=1\n"
            "epoch,reward_mean,reward_std,gap_mean,actor_loss,critic_loss,sigma,wall_ms\n"
            "10,1.5,,0.25,,,,\n");
  EXPECT_EQ(metrics_columns(true).back(), "episode_return");
  EXPECT_EQ(metrics_columns(false).size(), 8u);
}

TEST(MetricsCsv, RoundTripIsExact) {
  Rng r(1);
  std::vector<MetricsRow> rows;
  for (int i = 1; i <= 50; ++i) {
    MetricsRow row;
    row.epoch = 10 * i;
    row.reward_mean = r.normal();
    if (i % 2) row.reward_std = std::abs(r.normal());
    row.gap_mean = 1.0 / 3.0 * i;
    row.actor_loss = -r.uniform01() * 1e-300;
    row.critic_loss = r.uniform01() * 1e300;
    row.sigma = 0.1 * std::pow(0.999, i);
    if (i % 3) row.episode_return = r.normal();
    rows.push_back(row);
  }
  const auto parsed = parse_metrics_csv(format_metrics_csv(rows, true));
  ASSERT_EQ(parsed.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(parsed[i].epoch, rows[i].epoch);
    EXPECT_EQ(parsed[i].reward_mean, rows[i].reward_mean);
    EXPECT_EQ(parsed[i].reward_std, rows[i].reward_std);
    EXPECT_EQ(parsed[i].gap_mean, rows[i].gap_mean);
    EXPECT_EQ(parsed[i].actor_loss, rows[i].actor_loss);
    EXPECT_EQ(parsed[i].critic_loss, rows[i].critic_loss);
    EXPECT_EQ(parsed[i].sigma, rows[i].sigma);
    EXPECT_EQ(parsed[i].wall_ms, rows[i].wall_ms);
    EXPECT_EQ(parsed[i].episode_return, rows[i].episode_return);
  }
}

TEST(MetricsCsv, RejectsMalformedInput) {
  const std::string header = "epoch,reward_mean,reward_std,gap_mean,actor_loss,critic_loss,sigma,wall_ms\n";
  EXPECT_THROW(parse_metrics_csv(header + "1,,,,,,,\n"), Error);                              // no version line
  EXPECT_THROW(parse_metrics_csv("# metrics_schema=2\n" + header), Error);                     // future version
  EXPECT_THROW(parse_metrics_csv("# metrics_schema=1\n" + header + "1,,,,,,\n"), Error);       // short row
  EXPECT_THROW(parse_metrics_csv("# metrics_schema=1\n" + header + "1,x,,,,,,\n"), Error);     // bad number
  EXPECT_THROW(parse_metrics_csv("# metrics_schema=1\nepoch,reward\n"), Error);                // wrong columns
  EXPECT_THROW(parse_metrics_csv("# metrics_schema=1\n" + header + "5,,,,,,,\n5,,,,,,,\n"), Error);
  try {
    parse_metrics_csv("# metrics_schema=7\n" + header);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaVersion);
  }
}

TEST(MetricsCsv, WriterRejectsNonIncreasingEpochs) {
  testing::TempDir dir("metrics");
  MetricsRow a, b;
  a.epoch = 20;
  b.epoch = 10;
  EXPECT_THROW(write_metrics_csv(dir.path() / "m.csv", {a, b}, false), Error);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "m.csv"));
  write_metrics_csv(dir.path() / "m.csv", {b, a}, false);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "m.csv"));
}

TEST(ConvergenceEpoch, RequiresSustainedGap) {
  auto row = [](std::int64_t e, double g) {
    MetricsRow r;
    r.epoch = e;
    r.gap_mean = g;
    return r;
  };
  const std::vector<MetricsRow> rows = {row(10, 1.0), row(20, 0.1), row(30, 0.5), row(40, 0.1),
                                        row(50, 0.1), row(60, 0.05), row(70, 0.3)};
  EXPECT_EQ(convergence_epoch(rows, 0.2), 40);
  EXPECT_EQ(convergence_epoch(rows, 0.2, 1), 20);
  EXPECT_EQ(convergence_epoch(rows, 0.01), std::nullopt);
  // Fewer than `window` evaluations left: all remaining ones must qualify.
  EXPECT_EQ(convergence_epoch({row(10, 0.5), row(20, 0.1)}, 0.2), 20);
}

}  // namespace
}  // namespace gdmopt::harness
