// SPDX-License-Identifier: Apache-2.0

#include "relhal/nn/noise_net.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "relhal/error.hpp"

namespace relhal::nn {

void sinusoidal_embedding(int t, std::span<double> out) {
  const std::size_t dim = out.size();
  if (dim % 2 != 0) throw ConfigError("time-embedding dimension must be even");
  const std::size_t half = dim / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    out[k] = std::sin(t * freq);
    out[half + k] = std::cos(t * freq);
  }
}

template <typename T>
BasicNoiseNet<T>::BasicNoiseNet(BasicMlp<T> mlp, Eigen::Index embedding_dim)
    : mlp_(std::move(mlp)), embedding_dim_(embedding_dim) {
  if (embedding_dim_ < 0 || embedding_dim_ % 2 != 0) {
    throw ConfigError("time-embedding dimension must be even and non-negative");
  }
  if (mlp_.input_dim() != mlp_.output_dim() + embedding_dim_) {
    throw ShapeError("noise network input width must equal data dim + embedding dim");
  }
}

template <typename T>
BasicNoiseNet<T> BasicNoiseNet<T>::create(const NoiseNetConfig& config) {
  if (config.data_dim < 1 || config.hidden_width < 1 || config.hidden_layers < 0) {
    throw ConfigError("invalid noise network configuration");
  }
  std::vector<Eigen::Index> widths;
  widths.push_back(config.data_dim + config.embedding_dim);
  for (int l = 0; l < config.hidden_layers; ++l) widths.push_back(config.hidden_width);
  widths.push_back(config.data_dim);
  return BasicNoiseNet(BasicMlp<T>::kaiming_uniform(std::move(widths), config.seed),
                       config.embedding_dim);
}

template <typename T>
typename BasicNoiseNet<T>::Matrix BasicNoiseNet<T>::assemble_input(const Matrix& x_noisy,
                                                                    std::span<const int> steps) const {
  const Eigen::Index dim = data_dim();
  if (x_noisy.rows() != dim) {
    throw ShapeError("noisy input has " + std::to_string(x_noisy.rows()) +
                     " rows, network expects " + std::to_string(dim));
  }
  if (steps.size() != static_cast<std::size_t>(x_noisy.cols())) {
    throw ShapeError("one diffusion step per batch column required");
  }
  Matrix input(dim + embedding_dim_, x_noisy.cols());
  input.topRows(dim) = x_noisy;
  std::vector<double> emb(static_cast<std::size_t>(embedding_dim_));
  int last = -1;
  for (Eigen::Index c = 0; c < x_noisy.cols(); ++c) {
    const int t = steps[static_cast<std::size_t>(c)];
    if (t != last) {
      sinusoidal_embedding(t, emb);
      last = t;
    }
    for (Eigen::Index k = 0; k < embedding_dim_; ++k) {
      input(dim + k, c) = static_cast<T>(emb[static_cast<std::size_t>(k)]);
    }
  }
  return input;
}

template <typename T>
typename BasicNoiseNet<T>::Matrix BasicNoiseNet<T>::assemble_input(const Matrix& x_noisy,
                                                                    int step) const {
  std::vector<int> steps(static_cast<std::size_t>(x_noisy.cols()), step);
  return assemble_input(x_noisy, steps);
}

template <typename T>
typename BasicNoiseNet<T>::Matrix BasicNoiseNet<T>::forward(const Matrix& x_noisy,
                                                             std::span<const int> steps) const {
  return mlp_.forward(assemble_input(x_noisy, steps));
}

template <typename T>
typename BasicNoiseNet<T>::Matrix BasicNoiseNet<T>::forward(const Matrix& x_noisy, int step) const {
  return mlp_.forward(assemble_input(x_noisy, step));
}

template <typename T>
T BasicNoiseNet<T>::mse_gradient(const Matrix& x_noisy, std::span<const int> steps,
                                 const Matrix& target, std::span<T> grad,
                                 typename BasicMlp<T>::Cache& cache) const {
  return mlp_.mse_gradient(assemble_input(x_noisy, steps), target, grad, cache);
}

template class BasicNoiseNet<float>;
template class BasicNoiseNet<double>;

}  // namespace relhal::nn
