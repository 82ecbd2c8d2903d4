// SPDX-License-Identifier: Apache-2.0

#include "relhal/diffusion/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "relhal/error.hpp"

namespace relhal::diffusion {

namespace {

Eigen::MatrixXf noisy_batch(const VarianceSchedule& schedule, const Eigen::MatrixXf& x0,
                            std::span<const int> steps, const Eigen::MatrixXf& eps) {
  Eigen::MatrixXf x(x0.rows(), x0.cols());
  for (Eigen::Index c = 0; c < x0.cols(); ++c) {
    const double ab = schedule.alpha_bar(steps[static_cast<std::size_t>(c)]);
    x.col(c) = static_cast<float>(std::sqrt(ab)) * x0.col(c) +
               static_cast<float>(std::sqrt(1.0 - ab)) * eps.col(c);
  }
  return x;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (patience < 1) throw ConfigError("early-stopping patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (validation_interval < 1) throw ConfigError("validation interval must be >= 1");
}

double diffusion_loss(const NoisePredictor& predictor, const VarianceSchedule& schedule,
                      const Eigen::MatrixXd& x0, std::span<const int> steps,
                      const Eigen::MatrixXd& eps) {
  if (steps.size() != static_cast<std::size_t>(x0.cols())) {
    throw ShapeError("one diffusion step per column required");
  }
  if (eps.rows() != x0.rows() || eps.cols() != x0.cols()) {
    throw ShapeError("noise shape does not match the batch");
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < x0.cols(); ++c) {
    const int t = steps[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd xt = q_sample(schedule, x0.col(c), t, eps.col(c));
    total += (predictor.predict(xt, t) - eps.col(c)).squaredNorm();
  }
  const double loss = total / static_cast<double>(x0.size());
  if (!std::isfinite(loss)) throw NumericalError("non-finite diffusion loss");
  return loss;
}

Trainer::Trainer(nn::NoiseNet net, VarianceSchedule schedule, const TrainConfig& config,
                 std::int64_t total_steps)
    : net_(std::move(net)),
      schedule_(std::move(schedule)),
      adam_(net_.mlp().parameter_count(), config.adam),
      grad_(net_.mlp().parameter_count()),
      rng_(config.seed) {
  config.validate();
  lr_schedule_.max_lr = config.max_lr;
  lr_schedule_.total_steps = total_steps;
  lr_schedule_.warmup_fraction = config.warmup_fraction;
  lr_schedule_.initial_divisor = config.initial_divisor;
  lr_schedule_.final_divisor = config.final_divisor;
  lr_schedule_.validate();
}

double Trainer::current_lr() const {
  return nn::one_cycle_lr(lr_schedule_, std::min(step_, lr_schedule_.total_steps - 1));
}

double Trainer::train_step(const Eigen::MatrixXd& batch_x0) {
  if (batch_x0.rows() != net_.data_dim()) throw ShapeError("training batch has the wrong dimension");
  const Eigen::Index n = batch_x0.cols();
  std::uniform_int_distribution<int> pick_t(1, schedule_.steps());
  std::vector<int> steps(static_cast<std::size_t>(n));
  for (auto& t : steps) t = pick_t(rng_);
  const Eigen::MatrixXf eps = standard_normal(batch_x0.rows(), n, rng_).cast<float>();
  const Eigen::MatrixXf x0 = batch_x0.cast<float>();
  const Eigen::MatrixXf xt = noisy_batch(schedule_, x0, steps, eps);

  const double lr = current_lr();
  const float loss = net_.mse_gradient(xt, steps, eps, grad_, cache_);
  adam_.apply(net_.mlp().parameters(), grad_, lr);
  ++step_;
  for (float p : net_.mlp().parameters()) {
    if (!std::isfinite(p)) {
      throw NumericalError("non-finite parameter after training step " + std::to_string(step_));
    }
  }
  return loss;
}

double Trainer::validation_loss(const Eigen::MatrixXd& x0, std::span<const int> steps,
                                const Eigen::MatrixXd& eps) const {
  if (x0.cols() == 0) return 0.0;
  const Eigen::MatrixXf x0f = x0.cast<float>();
  const Eigen::MatrixXf epsf = eps.cast<float>();
  const Eigen::MatrixXf xt = noisy_batch(schedule_, x0f, steps, epsf);
  double total = 0.0;
  constexpr Eigen::Index kChunk = 1024;
  for (Eigen::Index begin = 0; begin < x0.cols(); begin += kChunk) {
    const Eigen::Index len = std::min(kChunk, x0.cols() - begin);
    const Eigen::MatrixXf pred =
        net_.forward(xt.middleCols(begin, len), steps.subspan(static_cast<std::size_t>(begin),
                                                               static_cast<std::size_t>(len)));
    total += (pred - epsf.middleCols(begin, len)).cast<double>().squaredNorm();
  }
  return total / static_cast<double>(x0.size());
}

TrainResult train(nn::NoiseNet initial, const VarianceSchedule& schedule,
                  const Eigen::MatrixXd& train_x0, const Eigen::MatrixXd& val_x0,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const Eigen::Index n = train_x0.cols();
  if (n < 1) throw ConfigError("training set is empty");
  if (val_x0.cols() > 0 && val_x0.rows() != train_x0.rows()) {
    throw ShapeError("validation windows have a different dimension from training windows");
  }
  const Eigen::Index batches = (n + config.batch_size - 1) / config.batch_size;
  const std::int64_t total_steps = static_cast<std::int64_t>(batches) * config.max_epochs;
  Trainer trainer(std::move(initial), schedule, config, total_steps);

  // Fixed validation draws so successive evaluations are comparable.
  Rng val_rng(derive_seed(config.seed, 0x7661'6c69'6461'7465ULL));
  std::uniform_int_distribution<int> pick_t(1, schedule.steps());
  std::vector<int> val_steps(static_cast<std::size_t>(val_x0.cols()));
  for (auto& t : val_steps) t = pick_t(val_rng);
  const Eigen::MatrixXd val_eps = standard_normal(val_x0.rows(), val_x0.cols(), val_rng);
  const bool has_val = val_x0.cols() > 0;

  TrainResult result;
  result.best = trainer.network();
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  int since_best = 0;
  Eigen::MatrixXd batch;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), trainer.rng());
    double epoch_loss = 0.0;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = trainer.current_lr();
    for (Eigen::Index begin = 0; begin < n; begin += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - begin);
      batch.resize(train_x0.rows(), len);
      for (Eigen::Index k = 0; k < len; ++k) {
        batch.col(k) = train_x0.col(order[static_cast<std::size_t>(begin + k)]);
      }
      epoch_loss += trainer.train_step(batch) * static_cast<double>(len);
    }
    rec.train_loss = epoch_loss / static_cast<double>(n);
    rec.step = trainer.steps_taken();
    rec.val_loss = std::numeric_limits<double>::quiet_NaN();

    if ((epoch + 1) % config.validation_interval == 0 || epoch + 1 == config.max_epochs) {
      // Without a validation split the training loss stands in.
      rec.val_loss = has_val ? trainer.validation_loss(val_x0, val_steps, val_eps) : rec.train_loss;
      if (!std::isfinite(rec.val_loss)) {
        throw NumericalError("non-finite validation loss at step " + std::to_string(rec.step));
      }
      if (rec.val_loss < result.best_val_loss) {
        result.best_val_loss = rec.val_loss;
        result.best_epoch = epoch;
        result.best = trainer.network();
        rec.improved = true;
        since_best = 0;
      } else {
        since_best += config.validation_interval;
      }
    }
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec, result.best);
    if (since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace relhal::diffusion
