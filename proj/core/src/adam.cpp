// SPDX-License-Identifier: Apache-2.0

#include "relhal/nn/adam.hpp"

#include <cmath>

#include "relhal/error.hpp"

namespace relhal::nn {

template <typename T>
AdamState<T>::AdamState(std::size_t parameter_count, AdamParams params)
    : params_(params), first_(parameter_count, T(0)), second_(parameter_count, T(0)) {
  if (!(params.beta1 >= 0.0 && params.beta1 < 1.0 && params.beta2 >= 0.0 && params.beta2 < 1.0 &&
        params.epsilon > 0.0)) {
    throw ConfigError("ADAM requires 0 <= beta < 1 and epsilon > 0");
  }
}

template <typename T>
void AdamState<T>::apply(std::span<T> params, std::span<const T> grads, double lr) {
  if (params.size() != first_.size() || grads.size() != first_.size()) {
    throw ShapeError("ADAM parameter/gradient size does not match optimizer state");
  }
  ++step_;
  const double b1 = params_.beta1;
  const double b2 = params_.beta2;
  const auto k = static_cast<double>(step_);
  const T correction1 = static_cast<T>(1.0 - std::pow(b1, k));
  const T correction2 = static_cast<T>(1.0 - std::pow(b2, k));
  const T tb1 = static_cast<T>(b1), tb2 = static_cast<T>(b2);
  const T eps = static_cast<T>(params_.epsilon);
  const T step_size = static_cast<T>(lr);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    first_[i] = tb1 * first_[i] + (T(1) - tb1) * g;
    second_[i] = tb2 * second_[i] + (T(1) - tb2) * g * g;
    const T m_hat = first_[i] / correction1;
    const T v_hat = second_[i] / correction2;
    params[i] -= step_size * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template class AdamState<float>;
template class AdamState<double>;

}  // namespace relhal::nn
