// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "config.hpp"
#include "relhal/data/dataset.hpp"
#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/halluc/calibration.hpp"

namespace relhal::app {

struct BuildDatasetResult {
  std::filesystem::path windows;
  Eigen::Index count = 0;
  data::SplitSpec split;
  data::BuildReport report;
};

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path curve;
  int epochs = 0;
  int best_epoch = -1;
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  bool early_stopped = false;
};

struct ModelTaskStats {
  std::size_t n = 0;
  double er_mean = 0.0;
  double er_std = 0.0;
  double ratio_to_baseline = 0.0;
};

struct ModelDetection {
  double overlap = 0.0;
  std::size_t low = 0;
  std::size_t medium = 0;
  std::size_t high = 0;
  std::array<double, 3> delta{};          // mean relative change per task (oc, uc, fc)
  std::array<std::size_t, 3> delta_n{};  // prompts behind each mean
};

struct BenchmarkResult {
  halluc::CalibrationQuartiles quartiles;
  // model tag -> task name -> stats
  std::map<std::string, std::map<std::string, ModelTaskStats>> table1;
  std::map<std::string, ModelDetection> table2;
  std::vector<std::filesystem::path> files;
};

BuildDatasetResult cmd_build_dataset(const RunConfig& config, std::ostream& log);
TrainSummary cmd_train(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_impute(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_score(const RunConfig& config, std::ostream& log);
halluc::CalibrationQuartiles cmd_calibrate(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_classify(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_mitigate(const RunConfig& config, std::ostream& log);
BenchmarkResult cmd_benchmark(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_heatmap(const RunConfig& config, std::ostream& log);

// CE on an nx x ny grid over [lo, hi]^2; entry (iy, ix) holds the point
// (x0 = lo + ix * h, x1 = lo + iy * h). Needs a two-dimensional model.
Eigen::MatrixXd heatmap_grid(const diffusion::DiffusionModel& model, int nx, int ny, double lo, double hi,
                             std::uint64_t seed, int draws = 1);

// Plain-text PGM (P2), one pixel per cell, top row = largest x1; darker = lower CE.
void write_pgm(std::ostream& out, const Eigen::MatrixXd& grid);

// Maps an exception type onto the documented process exit code.
int exit_code_for(const std::exception& e);

}  // namespace relhal::app
