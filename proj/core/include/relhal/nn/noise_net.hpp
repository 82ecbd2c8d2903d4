// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "relhal/nn/mlp.hpp"

namespace relhal::nn {

struct NoiseNetConfig {
  Eigen::Index data_dim = 72;
  Eigen::Index embedding_dim = 64;
  Eigen::Index hidden_width = 512;
  int hidden_layers = 5;
  std::uint64_t seed = 0;
};

// Sinusoidal embedding of diffusion step t: [sin(t w_k), cos(t w_k)] with
// w_k = 10000^(-k / (dim / 2)). `out` must have `dim` (even) entries.
void sinusoidal_embedding(int t, std::span<double> out);

// Noise-prediction network eps(x_t, t): an MLP fed with the noisy sample
// concatenated with the time embedding. Output has the data dimension.
template <typename T>
class BasicNoiseNet {
 public:
  using Matrix = typename BasicMlp<T>::Matrix;

  BasicNoiseNet() = default;
  BasicNoiseNet(BasicMlp<T> mlp, Eigen::Index embedding_dim);

  static BasicNoiseNet create(const NoiseNetConfig& config);

  Eigen::Index data_dim() const { return mlp_.output_dim(); }
  Eigen::Index embedding_dim() const { return embedding_dim_; }
  const BasicMlp<T>& mlp() const { return mlp_; }
  BasicMlp<T>& mlp() { return mlp_; }

  // Network input for a batch: noisy samples stacked on per-column embeddings.
  Matrix assemble_input(const Matrix& x_noisy, std::span<const int> steps) const;
  Matrix assemble_input(const Matrix& x_noisy, int step) const;

  Matrix forward(const Matrix& x_noisy, std::span<const int> steps) const;
  Matrix forward(const Matrix& x_noisy, int step) const;

  // MSE(forward(x_noisy, steps), target) and its parameter gradient.
  T mse_gradient(const Matrix& x_noisy, std::span<const int> steps, const Matrix& target,
                 std::span<T> grad, typename BasicMlp<T>::Cache& cache) const;

  friend bool operator==(const BasicNoiseNet&, const BasicNoiseNet&) = default;

 private:
  BasicMlp<T> mlp_;
  Eigen::Index embedding_dim_ = 0;
};

using NoiseNet = BasicNoiseNet<float>;

extern template class BasicNoiseNet<float>;
extern template class BasicNoiseNet<double>;

}  // namespace relhal::nn
