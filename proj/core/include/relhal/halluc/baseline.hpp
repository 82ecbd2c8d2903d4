// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "relhal/data/normalizer.hpp"
#include "relhal/diffusion/prompt.hpp"

namespace relhal::halluc {

// Training-mean response: every index, prompt included, holds its variable's
// training mean. The prompt only fixes the dimension.
Eigen::VectorXd baseline_respond(const data::Normalizer& normalizer, const diffusion::PromptSpec& prompt);

}  // namespace relhal::halluc
