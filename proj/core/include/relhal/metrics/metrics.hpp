// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relhal/data/relation.hpp"
#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/diffusion/prompt.hpp"
#include "relhal/diffusion/sampler.hpp"

namespace relhal::metrics {

using data::relational_error;

double rmse(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

// RMSE between the re-denoised vector and the pair, measured in the model's
// normalized units. Both inputs in original units.
double combined_error_from(const data::Normalizer& normalizer,
                           const Eigen::Ref<const Eigen::VectorXd>& x_hat,
                           const Eigen::Ref<const Eigen::VectorXd>& x_hat_hat);

// Combined Error of a complete prompt-response pair.
double combined_error(const diffusion::DiffusionModel& model,
                      const Eigen::Ref<const Eigen::VectorXd>& x_hat, diffusion::Rng& rng,
                      int draws = 1);

// Per-column CE. Noise for column j is drawn after that of column j - 1,
// so the result matches repeated single calls on the same generator.
Eigen::VectorXd combined_error_batch(const diffusion::DiffusionModel& model,
                                     const Eigen::MatrixXd& x_hat, diffusion::Rng& rng,
                                     int draws = 1);

// RMSE over the prompt indices between the output and the prompt values.
double prompt_error(const Eigen::Ref<const Eigen::VectorXd>& x_hat, const diffusion::PromptSpec& prompt);

// Mean over all indices of the population variance over t of mu_{i,t}.
double trajectory_variance(const diffusion::Trajectory& trajectory);

// Mean over `indices` of the population standard deviation over t.
double response_trajectory_spread(const diffusion::Trajectory& trajectory,
                                  std::span<const Eigen::Index> indices);

// Mean over the prompt indices of RMSE_t(mu_{i,t}, x_i).
double prompt_trajectory_spread(const diffusion::Trajectory& trajectory,
                                const diffusion::PromptSpec& prompt);

// Mean over all indices of RMSE_t(mu_{i,t}, x_hat_i) for a trajectory
// obtained by conditioning on the whole of x_hat.
double combined_trajectory_spread(const diffusion::Trajectory& trajectory,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_hat);

// Runs the second full conditioned pass on x_hat and returns its CTS.
double combined_trajectory_spread(const diffusion::DiffusionModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_hat, diffusion::Rng& rng);

struct ScoredPair {
  std::string window_id;
  std::string task;
  std::string model;
  Eigen::VectorXd x_hat;
  double ce = 0.0;
  std::optional<double> pe;
  std::optional<double> tv;
  std::optional<double> rts;
  std::optional<double> pts;
  std::optional<double> cts;
  std::optional<double> er;
};

// Header, config-hash comment, then one row per pair; absent metrics are
// written as empty fields.
void write_scored_pairs(std::ostream& out, std::span<const ScoredPair> pairs,
                        const std::string& config_hash);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace relhal::metrics
