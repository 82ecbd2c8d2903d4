// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

namespace relhal::diffusion {

// Partition of the data indices into prompt indices (with given values, in
// original units) and response indices to be imputed.
class PromptSpec {
 public:
  PromptSpec() = default;

  // Throws ShapeError/ConfigError on out-of-range or duplicate indices,
  // mismatched value count, or non-finite values.
  PromptSpec(Eigen::Index dim, std::vector<Eigen::Index> prompt_indices,
             std::vector<double> prompt_values);

  // Every index is a prompt index; used to re-condition on a full vector.
  static PromptSpec full(const Eigen::VectorXd& values);

  Eigen::Index dim() const { return dim_; }
  const std::vector<Eigen::Index>& prompt_indices() const { return prompt_; }
  const std::vector<double>& prompt_values() const { return values_; }
  const std::vector<Eigen::Index>& response_indices() const { return response_; }
  bool is_prompt(Eigen::Index i) const { return mask_[static_cast<std::size_t>(i)] != 0; }

  // Full-dimension vector with prompt values at I_p and `fill` elsewhere.
  Eigen::VectorXd scatter(double fill = 0.0) const;

 private:
  Eigen::Index dim_ = 0;
  std::vector<Eigen::Index> prompt_;
  std::vector<double> values_;
  std::vector<Eigen::Index> response_;
  std::vector<char> mask_;
};

}  // namespace relhal::diffusion
