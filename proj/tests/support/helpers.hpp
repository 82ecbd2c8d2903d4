// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "oracles.hpp"
#include "relhal/diffusion/diffusion_model.hpp"

namespace relhal::testing {

// Applies a scalar rule to every entry of x_t.
class FunctionPredictor final : public diffusion::NoisePredictor {
 public:
  FunctionPredictor(Eigen::Index dim, ScalarNoise rule) : dim_(dim), rule_(std::move(rule)) {}

  Eigen::Index dim() const override { return dim_; }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t) const override;

 private:
  Eigen::Index dim_;
  ScalarNoise rule_;
};

diffusion::DiffusionModel stub_model(std::vector<double> means, std::vector<double> stds, Eigen::Index steps,
                                     ScalarNoise rule, int schedule_steps = 1000);

// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Hourly weather-like source: seasonal and daily temperature cycles with
// AR(1) noise, relative humidity (%) anticorrelated with temperature.
// Columns: date, "T (degC)", "rh (%)".
void write_weather_csv(const std::filesystem::path& path, std::size_t rows, std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);

// File content with '#' comment lines removed.
std::string read_without_comments(const std::filesystem::path& path);

}  // namespace relhal::testing
