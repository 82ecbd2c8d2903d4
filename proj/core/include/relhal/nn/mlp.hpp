// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace relhal::nn {

// Parameter-sized buffers. Eigen peels unaligned heads with scalar code whose
// rounding differs from the packet path, so a fixed base alignment keeps
// results independent of where the allocator happens to place the buffer.
template <typename T>
using AlignedBuffer = std::vector<T, Eigen::aligned_allocator<T>>;

enum class Activation { kIdentity, kSiLU };

// Fully connected feed-forward network with hand-written backpropagation.
//
// Samples are stored column-wise: a batch is an (input_dim x batch) matrix.
// All parameters live in one contiguous buffer laid out layer by layer as
// [weight (column-major, out x in), bias (out)], which is also the order used
// by the optimizer and by checkpoints.
template <typename T>
class BasicMlp {
 public:
  using Scalar = T;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  // Intermediate values kept by the training forward pass.
  struct Cache {
    std::vector<Matrix> pre;   // affine outputs, one per layer
    std::vector<Matrix> post;  // post[0] is the input, post[l + 1] = act(pre[l])
  };

  BasicMlp() = default;

  // Zero-initialised network. `widths` lists input, hidden..., output sizes.
  explicit BasicMlp(std::vector<Eigen::Index> widths, Activation hidden = Activation::kSiLU,
                    Activation output = Activation::kIdentity);

  // Kaiming-uniform fan-in initialisation (bound 1/sqrt(fan_in) for weights
  // and biases), seeded and platform-deterministic for a given libstdc++.
  static BasicMlp kaiming_uniform(std::vector<Eigen::Index> widths, std::uint64_t seed,
                                  Activation hidden = Activation::kSiLU,
                                  Activation output = Activation::kIdentity);

  Eigen::Index input_dim() const { return widths_.empty() ? 0 : widths_.front(); }
  Eigen::Index output_dim() const { return widths_.empty() ? 0 : widths_.back(); }
  std::size_t num_layers() const { return widths_.empty() ? 0 : widths_.size() - 1; }
  const std::vector<Eigen::Index>& widths() const { return widths_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  Activation activation(std::size_t layer) const {
    return layer + 1 == num_layers() ? output_ : hidden_;
  }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }

  MatrixMap weight(std::size_t layer);
  ConstMatrixMap weight(std::size_t layer) const;
  VectorMap bias(std::size_t layer);
  ConstVectorMap bias(std::size_t layer) const;

  // Offset of layer `layer`'s weight block inside the parameter buffer.
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const;

  Matrix forward(const Matrix& input) const;

  // Forward pass retaining intermediates for backward(). Throws
  // NumericalError naming the layer if any activation becomes non-finite.
  const Matrix& forward(const Matrix& input, Cache& cache) const;

  // Accumulates nothing: writes d(loss)/d(params) into `grad` given
  // d(loss)/d(output). `grad` must have parameter_count() entries.
  void backward(const Cache& cache, const Matrix& output_grad, std::span<T> grad) const;

  // Loss = mean over every entry of (forward(input) - target)^2.
  // Writes the parameter gradient and returns the loss.
  T mse_gradient(const Matrix& input, const Matrix& target, std::span<T> grad, Cache& cache) const;

  template <typename U>
  BasicMlp<U> cast() const {
    BasicMlp<U> out(widths_, hidden_, output_);
    auto dst = out.parameters();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  friend bool operator==(const BasicMlp&, const BasicMlp&) = default;

 private:
  std::vector<Eigen::Index> widths_;
  Activation hidden_ = Activation::kSiLU;
  Activation output_ = Activation::kIdentity;
  std::vector<std::size_t> offsets_;
  AlignedBuffer<T> params_;
};

using Mlp = BasicMlp<float>;

extern template class BasicMlp<float>;
extern template class BasicMlp<double>;

}  // namespace relhal::nn
