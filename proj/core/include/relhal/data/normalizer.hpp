// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

namespace relhal::data {

// Per-variable standardisation for flattened windows laid out as
// i = v * steps + tau. Statistics come from the training split only.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> means, std::vector<double> stds, Eigen::Index steps);

  // Population mean/std per variable over every column and time-step of
  // `windows` (dim x count). Rejects variables with zero spread.
  static Normalizer fit(const Eigen::MatrixXd& windows, int variables, Eigen::Index steps);

  // Identity transform for `dim` single-step variables.
  static Normalizer identity(Eigen::Index dim);

  int variables() const { return static_cast<int>(means_.size()); }
  Eigen::Index steps() const { return steps_; }
  Eigen::Index dim() const { return steps_ * static_cast<Eigen::Index>(means_.size()); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }

  int variable_of(Eigen::Index i) const { return static_cast<int>(i / steps_); }
  double mean_at(Eigen::Index i) const { return means_[static_cast<std::size_t>(variable_of(i))]; }
  double std_at(Eigen::Index i) const { return stds_[static_cast<std::size_t>(variable_of(i))]; }

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& z) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  void check_rows(Eigen::Index rows) const;

  std::vector<double> means_;
  std::vector<double> stds_;
  Eigen::Index steps_ = 1;
};

}  // namespace relhal::data
