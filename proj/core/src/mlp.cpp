// SPDX-License-Identifier: Apache-2.0

#include "relhal/nn/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "relhal/error.hpp"

namespace relhal::nn {

namespace {

template <typename Derived>
auto silu(const Eigen::ArrayBase<Derived>& z) {
  using T = typename Derived::Scalar;
  return z / (T(1) + (-z).exp());
}

}  // namespace

template <typename T>
BasicMlp<T>::BasicMlp(std::vector<Eigen::Index> widths, Activation hidden, Activation output)
    : widths_(std::move(widths)), hidden_(hidden), output_(output) {
  if (widths_.size() < 2) throw ConfigError("MLP needs at least an input and an output width");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] < 0 || widths_[l + 1] < 1) {
      throw ConfigError("MLP layer widths must be positive");
    }
    offsets_.push_back(total);
    total += static_cast<std::size_t>(widths_[l + 1] * widths_[l] + widths_[l + 1]);
  }
  params_.assign(total, T(0));
}

template <typename T>
BasicMlp<T> BasicMlp<T>::kaiming_uniform(std::vector<Eigen::Index> widths, std::uint64_t seed,
                                         Activation hidden, Activation output) {
  BasicMlp net(std::move(widths), hidden, output);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto fan_in = net.widths_[l];
    const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = net.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<T>(dist(rng));
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = static_cast<T>(dist(rng));
  }
  return net;
}

template <typename T>
std::size_t BasicMlp<T>::bias_offset(std::size_t layer) const {
  return offsets_[layer] + static_cast<std::size_t>(widths_[layer + 1] * widths_[layer]);
}

template <typename T>
typename BasicMlp<T>::MatrixMap BasicMlp<T>::weight(std::size_t layer) {
  return MatrixMap(params_.data() + offsets_[layer], widths_[layer + 1], widths_[layer]);
}

template <typename T>
typename BasicMlp<T>::ConstMatrixMap BasicMlp<T>::weight(std::size_t layer) const {
  return ConstMatrixMap(params_.data() + offsets_[layer], widths_[layer + 1], widths_[layer]);
}

template <typename T>
typename BasicMlp<T>::VectorMap BasicMlp<T>::bias(std::size_t layer) {
  return VectorMap(params_.data() + bias_offset(layer), widths_[layer + 1]);
}

template <typename T>
typename BasicMlp<T>::ConstVectorMap BasicMlp<T>::bias(std::size_t layer) const {
  return ConstVectorMap(params_.data() + bias_offset(layer), widths_[layer + 1]);
}

template <typename T>
typename BasicMlp<T>::Matrix BasicMlp<T>::forward(const Matrix& input) const {
  if (input.rows() != input_dim()) {
    throw ShapeError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(input_dim()));
  }
  Matrix a = input;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * a;
    z.colwise() += bias(l);
    if (activation(l) == Activation::kSiLU) {
      a = silu(z.array()).matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

template <typename T>
const typename BasicMlp<T>::Matrix& BasicMlp<T>::forward(const Matrix& input, Cache& cache) const {
  if (input.rows() != input_dim()) {
    throw ShapeError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(input_dim()));
  }
  const std::size_t layers = num_layers();
  cache.pre.resize(layers);
  cache.post.resize(layers + 1);
  cache.post[0] = input;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix& z = cache.pre[l];
    z.noalias() = weight(l) * cache.post[l];
    z.colwise() += bias(l);
    if (activation(l) == Activation::kSiLU) {
      cache.post[l + 1] = silu(z.array()).matrix();
    } else {
      cache.post[l + 1] = z;
    }
    if (!cache.post[l + 1].allFinite()) {
      throw NumericalError("non-finite activation in layer " + std::to_string(l),
                           static_cast<std::ptrdiff_t>(l));
    }
  }
  return cache.post[layers];
}

template <typename T>
void BasicMlp<T>::backward(const Cache& cache, const Matrix& output_grad, std::span<T> grad) const {
  const std::size_t layers = num_layers();
  if (grad.size() != params_.size()) throw ShapeError("gradient buffer size mismatch");
  if (cache.pre.size() != layers || output_grad.rows() != output_dim() ||
      output_grad.cols() != cache.post[0].cols()) {
    throw ShapeError("backward called with inconsistent cache or output gradient");
  }
  Matrix delta = output_grad;
  for (std::size_t l = layers; l-- > 0;) {
    if (activation(l) == Activation::kSiLU) {
      // d/dz [z * s(z)] = s + z * s * (1 - s)
      const auto& z = cache.pre[l].array();
      const auto s = (T(1) / (T(1) + (-z).exp())).eval();
      delta.array() *= s * (T(1) + z * (T(1) - s));
    }
    if (!delta.allFinite()) {
      throw NumericalError("non-finite gradient in layer " + std::to_string(l),
                           static_cast<std::ptrdiff_t>(l));
    }
    MatrixMap gw(grad.data() + offsets_[l], widths_[l + 1], widths_[l]);
    VectorMap gb(grad.data() + bias_offset(l), widths_[l + 1]);
    gw.noalias() = delta * cache.post[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Matrix prev = weight(l).transpose() * delta;
      delta = std::move(prev);
    }
  }
}

template <typename T>
T BasicMlp<T>::mse_gradient(const Matrix& input, const Matrix& target, std::span<T> grad,
                            Cache& cache) const {
  const Matrix& out = forward(input, cache);
  if (target.rows() != out.rows() || target.cols() != out.cols()) {
    throw ShapeError("MSE target shape does not match network output");
  }
  const auto count = static_cast<T>(out.size());
  Matrix diff = out - target;
  const T loss = diff.squaredNorm() / count;
  if (!std::isfinite(static_cast<double>(loss))) {
    throw NumericalError("non-finite loss", static_cast<std::ptrdiff_t>(num_layers()) - 1);
  }
  diff *= T(2) / count;
  backward(cache, diff, grad);
  return loss;
}

template class BasicMlp<float>;
template class BasicMlp<double>;

}  // namespace relhal::nn
