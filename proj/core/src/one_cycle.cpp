// SPDX-License-Identifier: Apache-2.0

#include "relhal/nn/one_cycle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "relhal/error.hpp"

namespace relhal::nn {

namespace {

double cosine_anneal(double start, double end, double fraction) {
  return end + (start - end) / 2.0 * (1.0 + std::cos(std::numbers::pi * fraction));
}

}  // namespace

double OneCycleSchedule::peak_step() const {
  return warmup_fraction * static_cast<double>(total_steps) - 1.0;
}

void OneCycleSchedule::validate() const {
  if (!(max_lr > 0.0) || !(initial_divisor > 0.0) || !(final_divisor > 0.0)) {
    throw ConfigError("one-cycle learning rates and divisors must be positive");
  }
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("one-cycle warm-up fraction must lie in (0, 1)");
  }
  const double peak = peak_step();
  if (peak <= 0.0 || peak >= static_cast<double>(total_steps - 1)) {
    throw ConfigError("one-cycle schedule needs more steps (total_steps=" +
                      std::to_string(total_steps) + ")");
  }
}

double one_cycle_lr(const OneCycleSchedule& sched, std::int64_t step) {
  sched.validate();
  if (step < 0 || step >= sched.total_steps) {
    throw RangeError("one-cycle step " + std::to_string(step) + " outside [0, " +
                     std::to_string(sched.total_steps) + ")");
  }
  const double peak = sched.peak_step();
  const auto s = static_cast<double>(step);
  if (s <= peak) return cosine_anneal(sched.initial_lr(), sched.max_lr, s / peak);
  const double last = static_cast<double>(sched.total_steps - 1);
  return cosine_anneal(sched.max_lr, sched.final_lr(), (s - peak) / (last - peak));
}

}  // namespace relhal::nn
