// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relhal/data/relation.hpp"
#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/diffusion/prompt.hpp"

namespace relhal::halluc {

// Index of the smallest value; the lowest index wins ties. Throws
// ConfigError for an empty or non-finite input.
std::size_t argmin_index(std::span<const double> values);

struct MitigationResult {
  Eigen::MatrixXd samples;  // dim x N, original units
  std::vector<double> ce;
  std::size_t selected = 0;
  std::vector<double> er;       // empty unless a relation was supplied
  std::optional<double> delta;  // E_r(selected) / mean E_r

  Eigen::VectorXd response() const { return samples.col(static_cast<Eigen::Index>(selected)); }
};

struct MitigationOptions {
  int samples = 10;
  int ce_draws = 1;
  int threads = 1;
};

// Relative change in relational error of the selected sample. Returns 1 when
// every sample has zero error.
double relative_change(std::span<const double> er, std::size_t selected);

// Draws N responses with independent sub-seeds of `seed`, scores each with CE
// and keeps the argmin. With a relation, also reports E_r and its relative change.
MitigationResult mitigate(const diffusion::DiffusionModel& model, const diffusion::PromptSpec& prompt,
                          std::uint64_t seed, const MitigationOptions& options = {},
                          const data::Relation* relation = nullptr, Eigen::Index steps = 24);

// mitigate() for many prompts at once; entry k equals
// mitigate(model, prompts[k], seeds[k], ...) but all samples share one batch.
std::vector<MitigationResult> mitigate_batch(const diffusion::DiffusionModel& model,
                                             std::span<const diffusion::PromptSpec> prompts,
                                             std::span<const std::uint64_t> seeds,
                                             const MitigationOptions& options = {},
                                             const data::Relation* relation = nullptr, Eigen::Index steps = 24);

// Selection over already scored samples (external sample groups).
MitigationResult select_scored(Eigen::MatrixXd samples, std::vector<double> ce,
                               const data::Relation* relation = nullptr, Eigen::Index steps = 24);

}  // namespace relhal::halluc
