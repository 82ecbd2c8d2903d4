// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/diffusion/sampler.hpp"
#include "relhal/nn/adam.hpp"
#include "relhal/nn/noise_net.hpp"
#include "relhal/nn/one_cycle.hpp"

namespace relhal::diffusion {

struct TrainConfig {
  int batch_size = 1024;
  int max_epochs = 8000;
  int patience = 100;              // epochs without validation improvement
  int validation_interval = 1;     // epochs between validation passes
  std::uint64_t seed = 0;
  double max_lr = 1e-3;
  double warmup_fraction = 0.3;
  double initial_divisor = 25.0;
  double final_divisor = 1e4;
  nn::AdamParams adam;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN on epochs without validation
  double lr = 0.0;
  bool improved = false;
};

struct TrainResult {
  nn::NoiseNet best;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  std::vector<EpochRecord> curve;
  bool early_stopped = false;
};

// Noise-prediction MSE for explicit diffusion steps (one per column) and
// noise draws, on normalized clean samples x0.
double diffusion_loss(const NoisePredictor& predictor, const VarianceSchedule& schedule,
                      const Eigen::MatrixXd& x0, std::span<const int> steps,
                      const Eigen::MatrixXd& eps);

// Holds the mutable network and optimizer state; single writer.
class Trainer {
 public:
  Trainer(nn::NoiseNet net, VarianceSchedule schedule, const TrainConfig& config,
          std::int64_t total_steps);

  // Samples t ~ U{1..T} and eps ~ N(0, I) per column of the normalized batch,
  // takes one ADAM step at the current one-cycle rate and returns the loss.
  double train_step(const Eigen::MatrixXd& batch_x0);

  double validation_loss(const Eigen::MatrixXd& x0, std::span<const int> steps,
                         const Eigen::MatrixXd& eps) const;

  const nn::NoiseNet& network() const { return net_; }
  const VarianceSchedule& schedule() const { return schedule_; }
  std::int64_t steps_taken() const { return step_; }
  double current_lr() const;
  Rng& rng() { return rng_; }

 private:
  nn::NoiseNet net_;
  VarianceSchedule schedule_;
  nn::OneCycleSchedule lr_schedule_;
  nn::AdamState<float> adam_;
  nn::AlignedBuffer<float> grad_;
  nn::Mlp::Cache cache_;
  Rng rng_;
  std::int64_t step_ = 0;
};

using EpochCallback = std::function<void(const EpochRecord&, const nn::NoiseNet& best)>;

// Full training loop with per-epoch shuffling, validation on fixed seeded
// (t, eps) draws, best-checkpoint tracking and early stopping. Both inputs
// are normalized, one sample per column.
TrainResult train(nn::NoiseNet initial, const VarianceSchedule& schedule,
                  const Eigen::MatrixXd& train_x0, const Eigen::MatrixXd& val_x0,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace relhal::diffusion
