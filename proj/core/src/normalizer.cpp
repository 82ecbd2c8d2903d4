// SPDX-License-Identifier: Apache-2.0

#include "relhal/data/normalizer.hpp"

#include <cmath>
#include <string>

#include "relhal/error.hpp"

namespace relhal::data {

Normalizer::Normalizer(std::vector<double> means, std::vector<double> stds, Eigen::Index steps)
    : means_(std::move(means)), stds_(std::move(stds)), steps_(steps) {
  if (means_.size() != stds_.size() || means_.empty() || steps_ < 1) {
    throw ConfigError("normalizer needs matching, non-empty mean/std vectors");
  }
  for (std::size_t v = 0; v < stds_.size(); ++v) {
    if (!(stds_[v] > 0.0) || !std::isfinite(stds_[v]) || !std::isfinite(means_[v])) {
      throw ConfigError("normalizer statistics for variable " + std::to_string(v) +
                        " are degenerate (std must be finite and > 0)");
    }
  }
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& windows, int variables, Eigen::Index steps) {
  if (variables < 1 || steps < 1 || windows.rows() != variables * steps) {
    throw ShapeError("normalizer fit: window rows do not equal variables * steps");
  }
  if (windows.cols() < 1) throw ConfigError("normalizer fit needs at least one window");
  std::vector<double> means(static_cast<std::size_t>(variables));
  std::vector<double> stds(means.size());
  for (int v = 0; v < variables; ++v) {
    const auto block = windows.middleRows(v * steps, steps);
    const double mean = block.mean();
    const double var = (block.array() - mean).square().mean();
    means[static_cast<std::size_t>(v)] = mean;
    stds[static_cast<std::size_t>(v)] = std::sqrt(var);
  }
  return Normalizer(std::move(means), std::move(stds), steps);
}

Normalizer Normalizer::identity(Eigen::Index dim) {
  return Normalizer(std::vector<double>(static_cast<std::size_t>(dim), 0.0),
                    std::vector<double>(static_cast<std::size_t>(dim), 1.0), 1);
}

void Normalizer::check_rows(Eigen::Index rows) const {
  if (rows != dim()) {
    throw ShapeError("normalizer expects " + std::to_string(dim()) + " rows, got " +
                     std::to_string(rows));
  }
}

Eigen::MatrixXd Normalizer::normalize(const Eigen::MatrixXd& x) const {
  check_rows(x.rows());
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (int v = 0; v < variables(); ++v) {
    const auto k = static_cast<std::size_t>(v);
    z.middleRows(v * steps_, steps_) =
        (x.middleRows(v * steps_, steps_).array() - means_[k]) / stds_[k];
  }
  return z;
}

Eigen::MatrixXd Normalizer::denormalize(const Eigen::MatrixXd& z) const {
  check_rows(z.rows());
  Eigen::MatrixXd x(z.rows(), z.cols());
  for (int v = 0; v < variables(); ++v) {
    const auto k = static_cast<std::size_t>(v);
    x.middleRows(v * steps_, steps_) = z.middleRows(v * steps_, steps_).array() * stds_[k] + means_[k];
  }
  return x;
}

}  // namespace relhal::data
