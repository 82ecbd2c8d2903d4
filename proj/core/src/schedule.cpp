// SPDX-License-Identifier: Apache-2.0

#include "relhal/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "relhal/error.hpp"

namespace relhal::diffusion {

VarianceSchedule VarianceSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ConfigError("diffusion schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ConfigError("diffusion schedule requires 0 < beta_start <= beta_end < 1");
  }
  VarianceSchedule s;
  s.betas_.resize(static_cast<std::size_t>(steps));
  s.alphas_.resize(s.betas_.size());
  s.alpha_bars_.resize(s.betas_.size());
  double running = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    double beta = beta_start + (beta_end - beta_start) * frac;
    if (i == steps - 1) beta = steps == 1 ? beta_start : beta_end;
    const auto k = static_cast<std::size_t>(i);
    s.betas_[k] = beta;
    s.alphas_[k] = 1.0 - beta;
    running *= s.alphas_[k];
    s.alpha_bars_[k] = running;
  }
  return s;
}

void VarianceSchedule::check_step(int t) const {
  if (t < 1 || t > steps()) {
    throw RangeError("diffusion step " + std::to_string(t) + " outside [1, " +
                     std::to_string(steps()) + "]");
  }
}

std::size_t VarianceSchedule::index(int t) const {
  check_step(t);
  return static_cast<std::size_t>(t - 1);
}

double VarianceSchedule::sigma(int t) const { return std::sqrt(beta(t)); }

Eigen::MatrixXd q_sample(const VarianceSchedule& schedule, const Eigen::MatrixXd& x0, int t,
                         const Eigen::MatrixXd& eps) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols()) {
    throw ShapeError("q_sample noise shape does not match the clean sample");
  }
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

}  // namespace relhal::diffusion
