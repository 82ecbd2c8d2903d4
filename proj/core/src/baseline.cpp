// SPDX-License-Identifier: Apache-2.0

#include "relhal/halluc/baseline.hpp"

#include "relhal/error.hpp"

namespace relhal::halluc {

Eigen::VectorXd baseline_respond(const data::Normalizer& normalizer, const diffusion::PromptSpec& prompt) {
  if (prompt.dim() != normalizer.dim()) throw ShapeError("prompt and normalizer dimensions differ");
  Eigen::VectorXd out(normalizer.dim());
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = normalizer.mean_at(i);
  return out;
}

}  // namespace relhal::halluc
