// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "relhal/diffusion/prompt.hpp"

namespace relhal::tasks {

// Over-constrained: prompt all steps of variables 0 and 1.
// Under-constrained: prompt all steps of variable 2.
// Forecast: prompt the first half of the steps of every variable.
enum class TaskKind { kOC, kUC, kFC };

inline constexpr std::array<TaskKind, 3> kAllTasks = {TaskKind::kOC, TaskKind::kUC, TaskKind::kFC};

std::string_view task_name(TaskKind kind);  // "oc" / "uc" / "fc"
TaskKind parse_task(std::string_view name);  // case-insensitive

struct TaskMask {
  std::vector<Eigen::Index> prompt;
  std::vector<Eigen::Index> response;
};

// Index partition over i = v * steps + tau. Defaults match the three-variable,
// 24-step layout; the forecast prompt covers tau < steps / 2.
TaskMask make_mask(TaskKind kind, int variables = 3, Eigen::Index steps = 24);

// Prompt with values copied from `window` at the task's prompt indices.
diffusion::PromptSpec assemble_prompt(const Eigen::Ref<const Eigen::VectorXd>& window, TaskKind kind,
                                      int variables = 3, Eigen::Index steps = 24);

}  // namespace relhal::tasks
