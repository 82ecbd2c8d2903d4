// SPDX-License-Identifier: Apache-2.0

#include "relhal/diffusion/diffusion_model.hpp"

#include <cmath>
#include <string>

#include "relhal/error.hpp"

namespace relhal::diffusion {

Eigen::MatrixXd MlpNoisePredictor::predict(const Eigen::MatrixXd& x_t, int t) const {
  return net_.forward(x_t.cast<float>(), t).cast<double>();
}

DiffusionModel::DiffusionModel(VarianceSchedule schedule, data::Normalizer normalizer,
                               std::shared_ptr<const NoisePredictor> predictor)
    : schedule_(std::move(schedule)),
      normalizer_(std::move(normalizer)),
      predictor_(std::move(predictor)) {
  if (schedule_.steps() < 1) throw ConfigError("diffusion model needs a non-empty schedule");
  if (predictor_ && predictor_->dim() != normalizer_.dim()) {
    throw ShapeError("noise predictor dimension " + std::to_string(predictor_->dim()) +
                     " does not match data dimension " + std::to_string(normalizer_.dim()));
  }
}

void DiffusionModel::require_trained() const {
  if (!trained()) throw StateError("diffusion model has no trained noise predictor");
}

const NoisePredictor& DiffusionModel::predictor() const {
  require_trained();
  return *predictor_;
}

const nn::NoiseNet* DiffusionModel::network() const {
  const auto* mlp = dynamic_cast<const MlpNoisePredictor*>(predictor_.get());
  return mlp ? &mlp->network() : nullptr;
}

Eigen::MatrixXd DiffusionModel::predict_noise(const Eigen::MatrixXd& x_t, int t) const {
  schedule_.check_step(t);
  if (x_t.rows() != dim()) throw ShapeError("noisy sample has the wrong dimension");
  return predictor().predict(x_t, t);
}

Eigen::MatrixXd DiffusionModel::p_mean(const Eigen::MatrixXd& x_t, int t) const {
  schedule_.check_step(t);
  return posterior_mean(schedule_.alpha(t), schedule_.alpha_bar(t), x_t, predict_noise(x_t, t));
}

Eigen::MatrixXd DiffusionModel::p_sample(const Eigen::MatrixXd& x_t, int t,
                                         const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd mean = p_mean(x_t, t);
  if (t == 1) return mean;
  if (z.rows() != mean.rows() || z.cols() != mean.cols()) {
    throw ShapeError("p_sample noise shape does not match the sample");
  }
  return mean + schedule_.sigma(t) * z;
}

Eigen::MatrixXd posterior_mean(double alpha, double alpha_bar, const Eigen::MatrixXd& x_t,
                               const Eigen::MatrixXd& eps_pred) {
  if (x_t.rows() != eps_pred.rows() || x_t.cols() != eps_pred.cols()) {
    throw ShapeError("predicted noise shape does not match the sample");
  }
  const double coef = (1.0 - alpha) / std::sqrt(1.0 - alpha_bar);
  return (x_t - coef * eps_pred) / std::sqrt(alpha);
}

}  // namespace relhal::diffusion
