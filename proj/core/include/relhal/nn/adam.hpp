// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relhal/nn/mlp.hpp"

namespace relhal::nn {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// ADAM moment accumulators for a flat parameter buffer.
template <typename T>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t parameter_count, AdamParams params = {});

  std::size_t size() const { return first_.size(); }
  std::uint64_t step() const { return step_; }
  const AdamParams& params() const { return params_; }
  std::span<const T> first_moment() const { return first_; }
  std::span<const T> second_moment() const { return second_; }

  // One bias-corrected ADAM update of `params` in place.
  void apply(std::span<T> params, std::span<const T> grads, double lr);

 private:
  AdamParams params_;
  AlignedBuffer<T> first_;
  AlignedBuffer<T> second_;
  std::uint64_t step_ = 0;
};

extern template class AdamState<float>;
extern template class AdamState<double>;

}  // namespace relhal::nn
