// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relhal/data/dataset.hpp"
#include "relhal/diffusion/trainer.hpp"
#include "relhal/nn/noise_net.hpp"

namespace relhal::app {

// Everything a run depends on. Serialized as JSON; command-line flags are
// applied on top of a loaded file.
struct RunConfig {
  // dataset construction
  std::string dataset = "wth";
  std::vector<std::string> sources;
  std::string column0;
  std::string column1;
  std::int64_t window = 24;
  std::int64_t stride = 24;
  std::optional<double> x0_scale;  // unset: dataset default
  std::optional<double> x1_scale;
  std::int64_t max_windows = 0;    // keep the first n windows; 0 keeps all
  std::int64_t synthetic_points = 500;
  double synthetic_noise = 0.0;

  // model
  int schedule_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 1e-2;
  int embedding_dim = 64;
  int hidden_width = 512;
  int hidden_layers = 5;
  diffusion::TrainConfig train;
  int checkpoint_interval = 50;  // epochs between intermediate checkpoint writes

  std::uint64_t seed = 0;

  // evaluation
  int samples = 10;         // N for mitigation
  int impute_samples = 1;   // responses written per prompt by impute
  int ce_draws = 1;
  int threads = 1;
  std::int64_t calibration_windows = 0;  // 0: whole train split
  std::int64_t eval_windows = 0;         // 0: whole test split
  int overlap_bins = 50;
  bool trajectory_metrics = false;
  std::vector<std::string> tasks{"oc", "uc", "fc"};
  std::string split = "test";

  // heatmap grid
  int grid_nx = 61;
  int grid_ny = 61;
  double grid_min = -1.5;
  double grid_max = 1.5;

  // locations; not part of the config hash
  std::string output_dir;
  std::string windows;
  std::string checkpoint;
  std::string calibration;
  std::string responses;
  std::vector<std::string> external;

  data::DatasetKind kind() const;
  data::BuildOptions build_options() const;
  nn::NoiseNetConfig network_config(Eigen::Index data_dim) const;
  diffusion::TrainConfig train_config() const;

  std::filesystem::path output_path() const;
  std::filesystem::path windows_path() const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path calibration_path() const;

  std::string to_json(bool include_locations = true) const;
  static RunConfig from_json(const std::string& text, const RunConfig& defaults);
  static RunConfig from_json(const std::string& text) { return from_json(text, RunConfig{}); }
  static RunConfig load(const std::filesystem::path& path, const RunConfig& defaults);
  static RunConfig load(const std::filesystem::path& path) { return load(path, RunConfig{}); }

  // FNV-1a of the location-free JSON form.
  std::string hash() const;
};

inline constexpr const char* kOutputDirEnv = "RELHAL_OUTPUT_DIR";

}  // namespace relhal::app
