// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <gtest/gtest.h>

#include "relhal/error.hpp"
#include "relhal/tasks.hpp"

namespace relhal::tasks {
namespace {

TEST(Tasks, MaskSizes) {
  EXPECT_EQ(make_mask(TaskKind::kOC).prompt.size(), 48u);
  EXPECT_EQ(make_mask(TaskKind::kUC).prompt.size(), 24u);
  EXPECT_EQ(make_mask(TaskKind::kFC).prompt.size(), 36u);
  for (auto k : kAllTasks) {
    const auto m = make_mask(k);
    EXPECT_EQ(m.prompt.size() + m.response.size(), 72u);
    std::vector<Eigen::Index> all = m.prompt;
    all.insert(all.end(), m.response.begin(), m.response.end());
    std::sort(all.begin(), all.end());
    for (Eigen::Index i = 0; i < 72; ++i) EXPECT_EQ(all[static_cast<std::size_t>(i)], i);
  }
}

TEST(Tasks, MaskContents) {
  const auto uc = make_mask(TaskKind::kUC);
  EXPECT_EQ(uc.prompt.front(), 48);
  EXPECT_EQ(uc.prompt.back(), 71);
  const auto fc = make_mask(TaskKind::kFC);
  for (auto i : fc.prompt) EXPECT_LT(i % 24, 12);
  for (auto i : fc.response) EXPECT_GE(i % 24, 12);
  const auto oc = make_mask(TaskKind::kOC);
  for (auto i : oc.response) EXPECT_GE(i, 48);
}

TEST(Tasks, PromptCarriesWindowValues) {
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(72, 0.0, 71.0);
  const auto p = assemble_prompt(w, TaskKind::kFC);
  ASSERT_EQ(p.prompt_indices().size(), p.prompt_values().size());
  for (std::size_t k = 0; k < p.prompt_indices().size(); ++k) {
    EXPECT_EQ(p.prompt_values()[k], w(p.prompt_indices()[k]));
  }
  EXPECT_THROW(assemble_prompt(Eigen::VectorXd::Zero(71), TaskKind::kOC), ShapeError);
}

TEST(Tasks, Names) {
  for (auto k : kAllTasks) EXPECT_EQ(parse_task(task_name(k)), k);
  EXPECT_EQ(parse_task("OC"), TaskKind::kOC);
  EXPECT_THROW(parse_task("xx"), ConfigError);
}

}  // namespace
}  // namespace relhal::tasks
