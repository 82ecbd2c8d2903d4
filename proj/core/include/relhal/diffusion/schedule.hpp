// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

namespace relhal::diffusion {

// Linear DDPM variance schedule. Steps are 1-based: t = 1..T.
class VarianceSchedule {
 public:
  VarianceSchedule() = default;

  // beta_t linear from beta_start (t = 1) to beta_end (t = T); posterior
  // variance sigma_t^2 = beta_t.
  static VarianceSchedule linear(int steps, double beta_start, double beta_end);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta_start() const { return betas_.empty() ? 0.0 : betas_.front(); }
  double beta_end() const { return betas_.empty() ? 0.0 : betas_.back(); }

  double beta(int t) const { return betas_[index(t)]; }
  double alpha(int t) const { return alphas_[index(t)]; }
  double alpha_bar(int t) const { return alpha_bars_[index(t)]; }
  double sigma(int t) const;

  // Throws RangeError unless 1 <= t <= T.
  void check_step(int t) const;

 private:
  std::size_t index(int t) const;

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps, column-wise.
Eigen::MatrixXd q_sample(const VarianceSchedule& schedule, const Eigen::MatrixXd& x0, int t,
                         const Eigen::MatrixXd& eps);

}  // namespace relhal::diffusion
