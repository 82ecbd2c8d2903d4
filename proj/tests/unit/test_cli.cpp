// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "app/cli.hpp"
#include "app/commands.hpp"
#include "app/config.hpp"
#include "helpers.hpp"
#include "relhal/data/dataset.hpp"
#include "relhal/diffusion/checkpoint.hpp"
#include "relhal/error.hpp"

namespace relhal::app {
namespace {

using testing::TempDir;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write_toy_series(const std::filesystem::path& path, int rows) {
  std::ofstream f(path);
  f << "date,a,b\n";
  for (int r = 0; r < rows; ++r) f << "2020-01-01 " << r << "," << 1.0 + r << "," << 0.5 * r << "\n";
}

TEST(Cli, BuildsTrafficWindowsFromToySeries) {
  TempDir dir("cli-build");
  write_toy_series(dir / "toy.csv", 7 * 24 + 10);
  const auto r = cli({"build-dataset", "--dataset", "traffic", "--source", (dir / "toy.csv").string(), "-o",
                      dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto windows = data::read_windows(dir / "windows.csv");
  EXPECT_EQ(windows.dataset.count(), 7);
  EXPECT_EQ(windows.dataset.dim(), 72);
  EXPECT_EQ(windows.split.train.size(), 5);
  EXPECT_TRUE(std::filesystem::exists(dir / "windows.meta.json"));
}

TEST(Cli, TooFewWindowsForTheSplitIsAConfigError) {
  TempDir dir("cli-short");
  write_toy_series(dir / "toy.csv", 48);
  const auto r = cli({"build-dataset", "--dataset", "traffic", "--source", (dir / "toy.csv").string(), "-o",
                      dir.path().string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("got 2"), std::string::npos) << r.err;
}

TEST(Cli, MissingSourceNamesThePath) {
  TempDir dir("cli-missing");
  const std::string path = (dir / "absent.csv").string();
  const auto r = cli({"build-dataset", "--dataset", "wth", "--source", path, "-o", dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(path), std::string::npos) << r.err;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli-exit");
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"train", "--no-such-flag"}).code, 1);
  EXPECT_EQ(cli({"build-dataset", "--dataset", "nope", "-o", dir.path().string()}).code, 1);
  EXPECT_EQ(cli({"train", "-o", dir.path().string()}).code, 2);
  EXPECT_EQ(exit_code_for(ConfigError("x")), 1);
  EXPECT_EQ(exit_code_for(DataError("x")), 2);
  EXPECT_EQ(exit_code_for(ParseError("f.csv", 3, "x")), 2);
  EXPECT_EQ(exit_code_for(ShapeError("x")), 2);
  EXPECT_EQ(exit_code_for(NumericalError("x")), 3);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.dataset = "traffic";
  c.sources = {"a.csv"};
  c.x1_scale = 0.25;
  c.seed = 99;
  c.tasks = {"fc"};
  c.train.max_lr = 3e-4;
  c.output_dir = "/tmp/x";
  const auto back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(back.x1_scale, 0.25);
  EXPECT_EQ(back.train.max_lr, 3e-4);
  EXPECT_THROW(RunConfig::from_json("{\"no_such_key\": 1}"), ConfigError);
}

TEST(Config, HashIgnoresLocations) {
  RunConfig a;
  RunConfig b;
  b.output_dir = "/elsewhere";
  b.checkpoint = "m.ckpt";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, FlagsOverrideConfigFile) {
  TempDir dir("cli-config");
  write_toy_series(dir / "toy.csv", 24 * 10);
  const std::string cfg = (dir / "run.json").string();
  auto r = cli({"build-dataset", "--dataset", "traffic", "--source", (dir / "toy.csv").string(), "--max-windows",
                "8", "-o", dir.path().string(), "--write-config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto saved = RunConfig::load(cfg);
  EXPECT_EQ(saved.dataset, "traffic");
  EXPECT_EQ(saved.max_windows, 8);
  TempDir other("cli-config-2");
  r = cli({"build-dataset", "--config", cfg, "--max-windows", "7", "-o", other.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data::read_windows(other / "windows.csv").dataset.count(), 7);
}

TEST(Heatmap, MatchesClosedFormForCollapsingStub) {
  // eps = x_t / sqrt(beta_1) sends the t = 1 posterior mean to 0, so CE is the
  // RMS of the standardized point regardless of the noise draw.
  const double beta1 = 1e-4;
  const auto model = testing::stub_model({0.0, 0.0}, {1.0, 1.0}, 1,
                                         [&](double z, std::size_t, int) { return z / std::sqrt(beta1); });
  const auto grid = heatmap_grid(model, 5, 3, -1.0, 1.0, 4);
  ASSERT_EQ(grid.rows(), 3);
  ASSERT_EQ(grid.cols(), 5);
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 5; ++ix) {
      const double x0 = -1.0 + 0.5 * ix;
      const double x1 = -1.0 + 1.0 * iy;
      EXPECT_NEAR(grid(iy, ix), std::sqrt((x0 * x0 + x1 * x1) / 2.0), 1e-12);
    }
}

TEST(Heatmap, ConstantGridFromFixedPointStub) {
  const auto model = testing::stub_model({0.0, 0.0}, {1.0, 1.0}, 1, [](double, std::size_t, int) { return 0.0; });
  const auto a = heatmap_grid(model, 3, 3, -1.0, 1.0, 1);
  EXPECT_EQ(a.size(), 9);
  // eps = 0: the posterior mean is x_1 / sqrt(alpha_1), which equals the input plus a
  // noise term scaled by sqrt(beta_1 / alpha_1) ~ 0.01.
  EXPECT_LT(a.maxCoeff(), 0.1);
  std::ostringstream pgm;
  write_pgm(pgm, Eigen::MatrixXd::Constant(3, 3, 0.5));
  EXPECT_EQ(pgm.str(), "P2\n3 3\n255\n128 128 128\n128 128 128\n128 128 128\n");
}

TEST(Heatmap, RejectsNonPlanarModels) {
  const auto model = testing::stub_model({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 1, [](double, std::size_t, int) { return 0.0; });
  EXPECT_THROW(heatmap_grid(model, 3, 3, -1.0, 1.0, 1), ConfigError);
}

std::vector<std::string> tiny_model_flags(const std::filesystem::path& out) {
  return {"-o", out.string(), "--schedule-steps", "50", "--embedding-dim", "8", "--hidden-width", "16",
          "--hidden-layers", "2", "--batch-size", "32", "--max-epochs", "15", "--seed", "7"};
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

TEST(Pipeline, TinyEndToEndIsDeterministic) {
  TempDir src("cli-pipe-src");
  testing::write_weather_csv(src / "weather.csv", 24 * 21, 5);
  TempDir a("cli-pipe-a");
  TempDir b("cli-pipe-b");
  for (const auto* dir : {&a, &b}) {
    const auto flags = tiny_model_flags(dir->path());
    const auto built = cli(with({"build-dataset", "--dataset", "wth", "--source", (src / "weather.csv").string()}, flags));
    ASSERT_EQ(built.code, 0) << built.err;
    const auto r = cli(with({"train"}, flags));
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* step : {"calibrate", "impute", "mitigate"}) {
      const auto s = cli(with({step, "--samples", "3"}, flags));
      ASSERT_EQ(s.code, 0) << step << ": " << s.err;
    }
    const auto responses = (dir->path() / "responses.csv").string();
    for (const char* step : {"score", "classify"}) {
      const auto s = cli(with({step, "--responses", responses}, flags));
      ASSERT_EQ(s.code, 0) << step << ": " << s.err;
    }
    const auto bench = cli(with({"benchmark", "--samples", "3"}, flags));
    ASSERT_EQ(bench.code, 0) << bench.err;
  }
  for (const char* file : {"model.ckpt", "training_curve.csv", "calibration.json", "responses.csv", "scored.csv",
                           "classified.csv", "mitigation.csv", "table1.csv", "table2.csv", "scatter.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(a / file)) << file;
    EXPECT_EQ(testing::read_file(a / file), testing::read_file(b / file)) << file;
  }
}

TEST(Pipeline, HeatmapRejectsRelationalCheckpoint) {
  TempDir src("cli-heat-src");
  testing::write_weather_csv(src / "weather.csv", 24 * 7, 5);
  TempDir dir("cli-heat");
  auto flags = tiny_model_flags(dir.path());
  ASSERT_EQ(cli(with({"build-dataset", "--dataset", "wth", "--source", (src / "weather.csv").string()}, flags)).code, 0);
  ASSERT_EQ(cli(with({"train"}, flags)).code, 0);
  EXPECT_EQ(cli(with({"heatmap"}, flags)).code, 1);
  TempDir toy("cli-heat-toy");
  flags = tiny_model_flags(toy.path());
  ASSERT_EQ(cli(with({"build-dataset", "--dataset", "synthetic2d", "--points", "70"}, flags)).code, 0);
  ASSERT_EQ(cli(with({"train"}, flags)).code, 0);
  ASSERT_EQ(cli(with({"heatmap", "--grid-nx", "4", "--grid-ny", "3"}, flags)).code, 0);
  std::istringstream csv(testing::read_without_comments(toy / "heatmap.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 12);
}

TEST(Train, ValidationLossDropsAndCheckpointIsComplete) {
  TempDir dir("cli-train");
  RunConfig c;
  c.dataset = "synthetic2d";
  c.synthetic_points = 200;
  c.output_dir = dir.path().string();
  c.schedule_steps = 100;
  c.embedding_dim = 8;
  c.hidden_width = 32;
  c.hidden_layers = 2;
  c.train.batch_size = 32;
  c.train.max_epochs = 60;
  c.seed = 3;
  std::ostringstream log;
  cmd_build_dataset(c, log);
  const auto summary = cmd_train(c, log);
  EXPECT_EQ(summary.epochs, 60);
  EXPECT_LT(summary.best_val_loss, summary.initial_val_loss);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "model.ckpt.tmp"));
  const auto ckpt = diffusion::load_checkpoint(summary.checkpoint);
  EXPECT_EQ(ckpt.best_epoch, summary.best_epoch);
  EXPECT_EQ(ckpt.best_val_loss, summary.best_val_loss);
}

}  // namespace
}  // namespace relhal::app
