// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace relhal::testing {

Eigen::MatrixXd FunctionPredictor::predict(const Eigen::MatrixXd& x_t, int t) const {
  Eigen::MatrixXd out(x_t.rows(), x_t.cols());
  for (Eigen::Index j = 0; j < x_t.cols(); ++j)
    for (Eigen::Index i = 0; i < x_t.rows(); ++i) out(i, j) = rule_(x_t(i, j), static_cast<std::size_t>(i), t);
  return out;
}

diffusion::DiffusionModel stub_model(std::vector<double> means, std::vector<double> stds, Eigen::Index steps,
                                     ScalarNoise rule, int schedule_steps) {
  data::Normalizer normalizer(std::move(means), std::move(stds), steps);
  const Eigen::Index dim = normalizer.dim();
  return diffusion::DiffusionModel(diffusion::VarianceSchedule::linear(schedule_steps, 1e-4, 1e-2), normalizer,
                                   std::make_shared<FunctionPredictor>(dim, std::move(rule)));
}

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("relhal-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_weather_csv(const std::filesystem::path& path, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  constexpr double kPi = 3.14159265358979323846;
  std::ofstream out(path);
  out << "date,T (degC),rh (%)\n";
  double t_noise = 0.0;
  double h_noise = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double day = static_cast<double>(r) / 24.0;
    const double hour = static_cast<double>(r % 24);
    t_noise = 0.95 * t_noise + 0.6 * normal(rng);
    h_noise = 0.9 * h_noise + 2.0 * normal(rng);
    const double temp = 10.0 + 8.0 * std::sin(2.0 * kPi * (day - 110.0) / 365.0) +
                        5.0 * std::sin(2.0 * kPi * (hour - 9.0) / 24.0) + t_noise;
    const double rh = std::clamp(70.0 - 1.8 * (temp - 10.0) + h_noise, 15.0, 100.0);
    const auto d = static_cast<int>(day);
    out << "2020-" << std::setw(3) << std::setfill('0') << d << ' ' << std::setw(2) << static_cast<int>(hour)
        << ":00," << std::setprecision(6) << temp << ',' << rh << '\n';
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string read_without_comments(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace relhal::testing
