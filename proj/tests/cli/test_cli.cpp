// Runs the vistrip executable as a user would and inspects exit codes and files.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vistrip/checkpoint.hpp"
#include "vistrip/image_io.hpp"
#include "vistrip/random.hpp"
#include "vistrip/run_config.hpp"

using namespace vistrip;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "vistrip_cli_test.log";
  const std::string cmd = std::string(VISTRIP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream is(log);
  std::stringstream ss;
  ss << is.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("vistrip_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& leaf) const { return (dir_ / leaf).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VerifySmallPasses) {
  const Outcome r = run("verify --small --out " + path("v"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("v/report.txt")));
}

TEST_F(Cli, BenchCountsMatchClosedForms) {
  const Outcome r = run("bench --grid 8,16,32 --frames 4 --out " + path("b"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream csv(slurp(path("b/bench.csv")));
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string v; std::getline(ss, v, ',');) f.push_back(v);
    ASSERT_EQ(f.size(), 16u);
    for (std::size_t i = 3; i < 11; i += 2) EXPECT_EQ(f[i], f[i + 1]) << line;
    EXPECT_EQ(f[11], "true");
    ++rows;
  }
  EXPECT_EQ(rows, 3u);
}

TEST_F(Cli, UnknownFlagPrintsUsageAndExitsTwo) {
  const Outcome r = run("train --no-such-flag");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("--no-such-flag"), std::string::npos);
  EXPECT_NE(r.out.find("Usage:"), std::string::npos);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("train --direction sideways --out " + path("r")).code, 2);
  std::ofstream(path("bad.cfg")) << "heads = 7\n";
  const Outcome r = run("train --config " + path("bad.cfg") + " --out " + path("r"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("heads"), std::string::npos);
  EXPECT_NE(r.out.find("channels"), std::string::npos);
}

TEST_F(Cli, RestoreWithIdentityCheckpointReproducesInput) {
  auto cfg = model::ModelConfig::with_base(4, 1, 2);
  cfg.frame_window = 2;
  auto w = model::init_weights(cfg, 1);
  model::zero_projection(w);
  model::save_checkpoint(path("id.vsck"), cfg, w);
  Rng rng(2);
  const Tensor clip = io::quantize(random_uniform({3, 8, 8, 3}, rng, 0.0, 1.0));
  io::write_sequence(path("in"), clip);

  const Outcome r = run("restore --checkpoint " + path("id.vsck") + " --input " + path("in") + " --out " + path("out"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"frame_000.ppm", "frame_001.ppm", "frame_002.ppm"})
    EXPECT_EQ(slurp(path("out/") + f), slurp(path("in/") + f)) << f;
}

TEST_F(Cli, TrainFlagsOverrideConfigAndManifestReproducesRun) {
  std::ofstream(path("tiny.cfg")) << "channels = 4\nheads = 2\nstack = 1\ncrop = 8\nsource = 12\nbatch = 1\n"
                                     "steps = 2\nval_every = 0\nval_sequences = 1\nthreads = 1\nseed = 4\nlambda = 0.5\n";
  ASSERT_EQ(run("train --config " + path("tiny.cfg") + " --frames 2 --lambda 0.1 --seed 9 --out " + path("a")).code, 0);
  const auto cfg = train::parse_config(path("a/resolved.cfg"));
  EXPECT_EQ(cfg.frames(), 2u);
  EXPECT_EQ(cfg.loss.lambda, 0.1);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.model.base_channels, 4u);

  // Rerunning from the recorded configuration alone gives the same metrics.
  ASSERT_EQ(run("train --config " + path("a/resolved.cfg") + " --out " + path("b")).code, 0);
  EXPECT_EQ(slurp(path("a/metrics.csv")), slurp(path("b/metrics.csv")));
}

TEST_F(Cli, GenDataWritesManifestAndResolvedConfig) {
  ASSERT_EQ(run("gen-data --task moire --frames 2 --sequences 2 --size 16 --seed 3 --out " + path("d")).code, 0);
  EXPECT_TRUE(fs::exists(path("d/manifest.txt")));
  EXPECT_TRUE(fs::exists(path("d/seq_001/degraded/frame_001.ppm")));
  const std::string cfg = slurp(path("d/resolved.cfg"));
  EXPECT_NE(cfg.find("task = moire"), std::string::npos);
  EXPECT_NE(cfg.find("size = 16"), std::string::npos);

  // Regenerating from the same settings gives identical files.
  ASSERT_EQ(run("gen-data --task moire --frames 2 --sequences 2 --size 16 --seed 3 --out " + path("e")).code, 0);
  EXPECT_EQ(slurp(path("d/seq_001/degraded/frame_001.ppm")), slurp(path("e/seq_001/degraded/frame_001.ppm")));
}
