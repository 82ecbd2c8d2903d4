// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace relhal::nn {

// Cosine one-cycle learning-rate policy: rises from max_lr / initial_divisor
// to max_lr over the warm-up fraction, then anneals to
// max_lr / (initial_divisor * final_divisor) at the last step.
struct OneCycleSchedule {
  double max_lr = 1e-3;
  std::int64_t total_steps = 1;
  double warmup_fraction = 0.3;
  double initial_divisor = 25.0;
  double final_divisor = 1e4;

  double initial_lr() const { return max_lr / initial_divisor; }
  double final_lr() const { return initial_lr() / final_divisor; }

  // Step index (possibly fractional) at which the peak is reached.
  double peak_step() const;

  // Throws ConfigError for an unusable configuration.
  void validate() const;
};

// Learning rate at `step`, 0 <= step < total_steps; RangeError otherwise.
double one_cycle_lr(const OneCycleSchedule& sched, std::int64_t step);

}  // namespace relhal::nn
