// SPDX-License-Identifier: Apache-2.0

#include "relhal/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "relhal/error.hpp"

namespace relhal::tasks {

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kOC: return "oc";
    case TaskKind::kUC: return "uc";
    case TaskKind::kFC: return "fc";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "oc") return TaskKind::kOC;
  if (s == "uc") return TaskKind::kUC;
  if (s == "fc") return TaskKind::kFC;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected oc, uc or fc)");
}

TaskMask make_mask(TaskKind kind, int variables, Eigen::Index steps) {
  if (variables != 3 || steps < 2) {
    throw ConfigError("named tasks are defined for three variables and at least two steps");
  }
  TaskMask mask;
  for (int v = 0; v < variables; ++v) {
    for (Eigen::Index tau = 0; tau < steps; ++tau) {
      bool in_prompt = false;
      switch (kind) {
        case TaskKind::kOC: in_prompt = v <= 1; break;
        case TaskKind::kUC: in_prompt = v == 2; break;
        case TaskKind::kFC: in_prompt = tau < steps / 2; break;
      }
      (in_prompt ? mask.prompt : mask.response).push_back(v * steps + tau);
    }
  }
  return mask;
}

diffusion::PromptSpec assemble_prompt(const Eigen::Ref<const Eigen::VectorXd>& window, TaskKind kind,
                                      int variables, Eigen::Index steps) {
  if (window.size() != variables * steps) {
    throw ShapeError("window of size " + std::to_string(window.size()) + " does not match " +
                     std::to_string(variables) + " x " + std::to_string(steps) + " layout");
  }
  auto mask = make_mask(kind, variables, steps);
  std::vector<double> values;
  values.reserve(mask.prompt.size());
  for (auto i : mask.prompt) values.push_back(window(i));
  return diffusion::PromptSpec(window.size(), std::move(mask.prompt), std::move(values));
}

}  // namespace relhal::tasks
