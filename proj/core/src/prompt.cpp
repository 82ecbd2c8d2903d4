// SPDX-License-Identifier: Apache-2.0

#include "relhal/diffusion/prompt.hpp"

#include <cmath>
#include <string>

#include "relhal/error.hpp"

namespace relhal::diffusion {

PromptSpec::PromptSpec(Eigen::Index dim, std::vector<Eigen::Index> prompt_indices,
                       std::vector<double> prompt_values)
    : dim_(dim), prompt_(std::move(prompt_indices)), values_(std::move(prompt_values)) {
  if (dim_ < 1) throw ShapeError("prompt dimension must be positive");
  if (prompt_.size() != values_.size()) {
    throw ShapeError("prompt has " + std::to_string(prompt_.size()) + " indices but " +
                     std::to_string(values_.size()) + " values");
  }
  mask_.assign(static_cast<std::size_t>(dim_), 0);
  for (std::size_t k = 0; k < prompt_.size(); ++k) {
    const Eigen::Index i = prompt_[k];
    if (i < 0 || i >= dim_) throw ShapeError("prompt index " + std::to_string(i) + " out of range");
    auto& slot = mask_[static_cast<std::size_t>(i)];
    if (slot) throw ConfigError("duplicate prompt index " + std::to_string(i));
    slot = 1;
    if (!std::isfinite(values_[k])) {
      throw ConfigError("prompt value at index " + std::to_string(i) + " is not finite");
    }
  }
  for (Eigen::Index i = 0; i < dim_; ++i) {
    if (!mask_[static_cast<std::size_t>(i)]) response_.push_back(i);
  }
}

PromptSpec PromptSpec::full(const Eigen::VectorXd& values) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::vector<double> vals(idx.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    idx[static_cast<std::size_t>(i)] = i;
    vals[static_cast<std::size_t>(i)] = values(i);
  }
  return PromptSpec(values.size(), std::move(idx), std::move(vals));
}

Eigen::VectorXd PromptSpec::scatter(double fill) const {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(dim_, fill);
  for (std::size_t k = 0; k < prompt_.size(); ++k) v(prompt_[k]) = values_[k];
  return v;
}

}  // namespace relhal::diffusion
