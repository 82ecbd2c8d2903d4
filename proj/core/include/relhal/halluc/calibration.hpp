// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/tasks.hpp"

namespace relhal::halluc {

// Linear interpolation between order statistics at position p * (n - 1).
double quantile(std::span<const double> values, double p);

struct CalibrationQuartiles {
  double q2 = 0.0;
  double q3 = 0.0;
  std::size_t n = 0;
  std::string dataset;
  std::string model_hash;

  // Throws ConfigError for fewer than 4 or non-finite values.
  static CalibrationQuartiles from_values(std::span<const double> ce, std::string dataset = {},
                                          std::string model_hash = {});
  void validate() const;

  std::string to_json() const;
  static CalibrationQuartiles from_json(std::string_view text);

  friend bool operator==(const CalibrationQuartiles&, const CalibrationQuartiles&) = default;
};

enum class HallucinationLevel { kLow, kMedium, kHigh };

std::string_view level_name(HallucinationLevel level);  // "low" / "medium" / "high"
HallucinationLevel classify(double ce, const CalibrationQuartiles& quartiles);

struct CalibrationOptions {
  std::vector<tasks::TaskKind> tasks{tasks::kAllTasks.begin(), tasks::kAllTasks.end()};
  int ce_draws = 1;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string dataset;
  std::string model_hash;
};

struct CalibrationRun {
  CalibrationQuartiles quartiles;
  std::vector<double> ce;  // task-major: all windows of tasks[0], then tasks[1], ...
};

// Imputes every window (one per column) under every task and takes the CE
// quartiles of the pooled prompt-response pairs.
CalibrationRun calibrate(const diffusion::DiffusionModel& model, const Eigen::MatrixXd& train_windows,
                         int variables, Eigen::Index steps, const CalibrationOptions& options = {});

void save_calibration(const std::filesystem::path& path, const CalibrationQuartiles& quartiles);
CalibrationQuartiles load_calibration(const std::filesystem::path& path);

}  // namespace relhal::halluc
