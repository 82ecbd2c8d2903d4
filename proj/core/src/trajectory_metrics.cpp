// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "relhal/error.hpp"
#include "relhal/metrics/metrics.hpp"

namespace relhal::metrics {

namespace {

void check_grid(const diffusion::Trajectory& trajectory) {
  if (trajectory.means.cols() == 0 || trajectory.means.rows() == 0 || !trajectory.means.allFinite()) {
    throw ConfigError("trajectory grid is empty or incomplete");
  }
}

double population_variance(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double mean = row.mean();
  return (row.array() - mean).square().mean();
}

double rmse_over_steps(const Eigen::Ref<const Eigen::RowVectorXd>& row, double target) {
  return std::sqrt((row.array() - target).square().mean());
}

}  // namespace

double trajectory_variance(const diffusion::Trajectory& trajectory) {
  check_grid(trajectory);
  double total = 0.0;
  for (Eigen::Index i = 0; i < trajectory.dim(); ++i) total += population_variance(trajectory.means.row(i));
  return total / static_cast<double>(trajectory.dim());
}

double response_trajectory_spread(const diffusion::Trajectory& trajectory,
                                  std::span<const Eigen::Index> indices) {
  check_grid(trajectory);
  if (indices.empty()) throw ConfigError("RTS is undefined for an empty response");
  double total = 0.0;
  for (auto i : indices) total += std::sqrt(population_variance(trajectory.means.row(i)));
  return total / static_cast<double>(indices.size());
}

double prompt_trajectory_spread(const diffusion::Trajectory& trajectory,
                                const diffusion::PromptSpec& prompt) {
  check_grid(trajectory);
  const auto& idx = prompt.prompt_indices();
  if (idx.empty()) throw ConfigError("PTS is undefined for an empty prompt");
  if (prompt.dim() != trajectory.dim()) throw ShapeError("trajectory and prompt dimensions differ");
  double total = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    total += rmse_over_steps(trajectory.means.row(idx[k]), prompt.prompt_values()[k]);
  }
  return total / static_cast<double>(idx.size());
}

double combined_trajectory_spread(const diffusion::Trajectory& trajectory,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_hat) {
  check_grid(trajectory);
  if (x_hat.size() != trajectory.dim()) throw ShapeError("trajectory and vector dimensions differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < x_hat.size(); ++i) total += rmse_over_steps(trajectory.means.row(i), x_hat(i));
  return total / static_cast<double>(x_hat.size());
}

double combined_trajectory_spread(const diffusion::DiffusionModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_hat, diffusion::Rng& rng) {
  diffusion::Trajectory trajectory;
  diffusion::repaint_impute(model, diffusion::PromptSpec::full(x_hat), rng, &trajectory);
  return combined_trajectory_spread(trajectory, x_hat);
}

}  // namespace relhal::metrics
