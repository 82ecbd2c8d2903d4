// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include <Eigen/Core>

#include "relhal/data/normalizer.hpp"
#include "relhal/diffusion/schedule.hpp"
#include "relhal/nn/noise_net.hpp"

namespace relhal::diffusion {

// eps_theta(x_t, t) on normalized data, one sample per column.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t) const = 0;
};

class MlpNoisePredictor final : public NoisePredictor {
 public:
  explicit MlpNoisePredictor(nn::NoiseNet net) : net_(std::move(net)) {}

  Eigen::Index dim() const override { return net_.data_dim(); }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t) const override;

  const nn::NoiseNet& network() const { return net_; }

 private:
  nn::NoiseNet net_;
};

// Schedule + noise predictor + normalizer. Public inputs and outputs of the
// sampling functions are in original data units; the network sees
// standardized data. Immutable once built, so it can be shared across
// threads.
class DiffusionModel {
 public:
  DiffusionModel() = default;
  DiffusionModel(VarianceSchedule schedule, data::Normalizer normalizer,
                 std::shared_ptr<const NoisePredictor> predictor);

  bool trained() const { return predictor_ != nullptr; }
  // Throws StateError when no predictor is attached.
  void require_trained() const;

  Eigen::Index dim() const { return normalizer_.dim(); }
  const VarianceSchedule& schedule() const { return schedule_; }
  const data::Normalizer& normalizer() const { return normalizer_; }
  const NoisePredictor& predictor() const;

  // Network weights when the predictor is MLP-backed, nullptr otherwise.
  const nn::NoiseNet* network() const;

  // All of the following operate in normalized units.
  Eigen::MatrixXd predict_noise(const Eigen::MatrixXd& x_t, int t) const;
  Eigen::MatrixXd p_mean(const Eigen::MatrixXd& x_t, int t) const;
  // mu + sigma_t * z for t > 1; mu at t = 1 (z ignored).
  Eigen::MatrixXd p_sample(const Eigen::MatrixXd& x_t, int t, const Eigen::MatrixXd& z) const;

 private:
  VarianceSchedule schedule_;
  data::Normalizer normalizer_;
  std::shared_ptr<const NoisePredictor> predictor_;
};

// (x_t - (1 - alpha_t) / sqrt(1 - alpha_bar_t) * eps) / sqrt(alpha_t)
Eigen::MatrixXd posterior_mean(double alpha, double alpha_bar, const Eigen::MatrixXd& x_t,
                               const Eigen::MatrixXd& eps_pred);

}  // namespace relhal::diffusion
