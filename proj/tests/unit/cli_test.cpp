#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>

#include "gdmopt/io.hpp"
#include "test_support.hpp"

namespace {

using gdmopt::read_file;
using gdmopt::testing::TempDir;

struct Result {
  int status = -1;
  std::string output;  // stdout
  std::string errors;  // stderr
};

Result run(const std::string& args, const std::string& env_prefix = {}) {
  TempDir scratch("cli-stderr");
  const auto err = scratch.path() / "stderr.txt";
  const std::string cmd = env_prefix + " \"" GDMOPT_CLI_PATH "\" " + args + " 2>\"" + err.string() + "\"";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  if (std::filesystem::exists(err)) r.errors = read_file(err);
  return r;
}

std::filesystem::path write_config(const TempDir& dir, const std::string& body) {
  const auto path = dir.path() / "run.cfg";
  gdmopt::write_file_atomic(path, body);
  return path;
}

const char* kSmallPower =
    "env = power\nalgorithm = gdm-online\nseed = 7\npower.channels = 2\ngdm.epochs = 30\ngdm.batch = 8\n"
    "gdm.steps = 3\ngdm.actor_hidden = 8\ngdm.critic_hidden = 8\ngdm.eval_states = 4\n";

TEST(Cli, TrainIsByteReproducible) {
  TempDir dir("cli-repro");
  const auto cfg = write_config(dir, kSmallPower);
  const auto a = run("train " + cfg.string() + " --out " + (dir.path() / "a").string());
  const auto b = run("train " + cfg.string() + " --out " + (dir.path() / "b").string());
  ASSERT_EQ(a.status, 0) << a.errors;
  ASSERT_EQ(b.status, 0) << b.errors;
  EXPECT_EQ(read_file(dir.path() / "a" / "metrics.csv"), read_file(dir.path() / "b" / "metrics.csv"));
  EXPECT_EQ(read_file(dir.path() / "a" / "checkpoint.gdm"), read_file(dir.path() / "b" / "checkpoint.gdm"));
  EXPECT_TRUE(nlohmann::json::parse(a.output).contains("final"));
}

TEST(Cli, MissingFieldExitsWithConfigStatus) {
  TempDir dir("cli-missing");
  const auto cfg = write_config(dir, "env = power\nalgorithm = gdm-online\n");
  const auto r = run("train " + cfg.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.errors.find("seed"), std::string::npos) << r.errors;
}

TEST(Cli, UnknownSubcommandAndBadFlagsExitWithConfigStatus) {
  EXPECT_EQ(run("launch").status, 2);
  EXPECT_EQ(run("eval").status, 2);
  EXPECT_EQ(run("oracle --gains 1,x").status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, TamperedCheckpointIsRejected) {
  TempDir dir("cli-tamper");
  const auto cfg = write_config(dir, kSmallPower);
  const auto out = dir.path() / "run";
  ASSERT_EQ(run("train " + cfg.string() + " --out " + out.string()).status, 0);
  std::string bytes = read_file(out / "checkpoint.gdm");
  const auto ckpt = dir.path() / "bad.gdm";
  gdmopt::write_file_atomic(ckpt, bytes.substr(0, bytes.size() - 8));
  const auto r = run("eval " + ckpt.string());
  EXPECT_EQ(r.status, 4) << r.errors;

  const std::string old = bytes.replace(bytes.find("\"schema_version\":1"), 18, "\"schema_version\":0");
  gdmopt::write_file_atomic(ckpt, old);
  const auto v = run("eval " + ckpt.string());
  EXPECT_EQ(v.status, 4);
  EXPECT_NE(v.errors.find("migration"), std::string::npos) << v.errors;
}

TEST(Cli, EvalReportsJsonAndHonoursZeroEpisodes) {
  TempDir dir("cli-eval");
  const auto cfg = write_config(dir, kSmallPower);
  const auto out = dir.path() / "run";
  ASSERT_EQ(run("train " + cfg.string() + " --out " + out.string()).status, 0);
  const auto ck = (out / "checkpoint.gdm").string();
  const auto r = run("eval " + ck + " --episodes 8");
  ASSERT_EQ(r.status, 0) << r.errors;
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_EQ(j.at("episodes"), 8);
  EXPECT_TRUE(j.contains("gap_mean"));
  const auto z = run("eval " + ck + " --episodes 0");
  ASSERT_EQ(z.status, 0) << z.errors;
  EXPECT_FALSE(nlohmann::json::parse(z.output).contains("reward_mean"));
}

TEST(Cli, OracleWaterFilling) {
  const auto r = run("oracle --gains 1,0.5,2.5 --power 10");
  ASSERT_EQ(r.status, 0) << r.errors;
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_NEAR(j.at("allocation")[0].get<double>(), 3.4666666666666668, 1e-9);
  EXPECT_NEAR(j.at("rate").get<double>(), 6.80, 5e-3);
  const auto two = nlohmann::json::parse(run("oracle --gains 1,1 --power 10").output);
  EXPECT_NEAR(two.at("allocation")[0].get<double>(), 5.0, 1e-12);
}

TEST(Cli, OutputDirectoryOverride) {
  TempDir dir("cli-envdir");
  const auto cfg = write_config(dir, std::string(kSmallPower) + "output_dir = " + (dir.path() / "cfgdir").string());
  const auto target = dir.path() / "from-env";
  const auto r = run("train " + cfg.string(), "GDMOPT_OUTPUT_DIR=" + target.string());
  ASSERT_EQ(r.status, 0) << r.errors;
  EXPECT_TRUE(std::filesystem::exists(target / "metrics.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "cfgdir"));
}

TEST(Cli, SweepWritesOnePointPerCombination) {
  TempDir dir("cli-sweep");
  const auto cfg = write_config(dir, kSmallPower);
  const auto r = run("sweep " + cfg.string() + " --grid \"gdm.steps=2|3\" --out " +
                     (dir.path() / "sw").string());
  ASSERT_EQ(r.status, 0) << r.errors;
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "sw" / "point_001" / "checkpoint.gdm"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "sw" / "sweep.csv"));
}

}  // namespace
