// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/diffusion/prompt.hpp"

namespace relhal::diffusion {

using Rng = std::mt19937_64;

// Derives an independent generator seed from (base seed, stream index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Predicted means mu_{i,t} of one conditioned reverse pass, in original
// units. Column t - 1 holds step t, so the matrix is dim x T.
struct Trajectory {
  Eigen::MatrixXd means;

  Eigen::Index dim() const { return means.rows(); }
  int steps() const { return static_cast<int>(means.cols()); }
};

struct ImputeOptions {
  bool capture_trajectory = false;
  // Force the full reverse pass even when there is nothing to impute
  // (needed to record a trajectory for a fully specified prompt).
  bool run_when_complete = false;
  // Worker threads for batched sampling; columns are split into contiguous
  // chunks, each with its own generators, so results depend only on the
  // seeds and the thread count.
  int threads = 1;
};

// RePaint-conditioned imputation: a single reverse pass t = T..1 in which
// the response indices follow p_sample and the prompt indices are replaced
// at every step by the prompt corrupted to level t. Returned vector is in
// original units with the prompt values restored exactly.
Eigen::VectorXd repaint_impute(const DiffusionModel& model, const PromptSpec& prompt, Rng& rng,
                               Trajectory* trajectory = nullptr);

// Batched form: column j is sampled with a generator seeded by seeds[j].
// `trajectories`, when non-null, receives one entry per prompt.
Eigen::MatrixXd repaint_impute_batch(const DiffusionModel& model,
                                     std::span<const PromptSpec> prompts,
                                     std::span<const std::uint64_t> seeds,
                                     const ImputeOptions& options = {},
                                     std::vector<Trajectory>* trajectories = nullptr);

// One-step re-denoising of complete vectors (original units, one per column):
// corrupt to t = 1 with the given standard-normal noise, apply p_mean, and
// map back to original units.
Eigen::MatrixXd denoise_full_vector(const DiffusionModel& model, const Eigen::MatrixXd& x_hat,
                                    const Eigen::MatrixXd& eps);

// Same, drawing the noise from `rng`; averages the result over `draws`
// independent corruptions.
Eigen::MatrixXd denoise_full_vector(const DiffusionModel& model, const Eigen::MatrixXd& x_hat,
                                    Rng& rng, int draws = 1);

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace relhal::diffusion
