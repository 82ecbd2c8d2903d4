// SPDX-License-Identifier: Apache-2.0

#include "relhal/halluc/mitigation.hpp"

#include <cmath>
#include <numeric>

#include "relhal/diffusion/sampler.hpp"
#include "relhal/error.hpp"
#include "relhal/metrics/metrics.hpp"

namespace relhal::halluc {

std::size_t argmin_index(std::span<const double> values) {
  if (values.empty()) throw ConfigError("argmin of an empty set");
  std::size_t best = 0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) throw NumericalError("non-finite score at sample " + std::to_string(j));
    if (values[j] < values[best]) best = j;
  }
  return best;
}

double relative_change(std::span<const double> er, std::size_t selected) {
  if (selected >= er.size()) throw RangeError("selected sample out of range");
  const double mean = std::accumulate(er.begin(), er.end(), 0.0) / static_cast<double>(er.size());
  if (mean == 0.0) return 1.0;
  return er[selected] / mean;
}

MitigationResult select_scored(Eigen::MatrixXd samples, std::vector<double> ce, const data::Relation* relation,
                               Eigen::Index steps) {
  if (static_cast<std::size_t>(samples.cols()) != ce.size()) {
    throw ShapeError("sample count and CE count differ");
  }
  MitigationResult result;
  result.selected = argmin_index(ce);
  result.samples = std::move(samples);
  result.ce = std::move(ce);
  if (relation != nullptr) {
    for (Eigen::Index j = 0; j < result.samples.cols(); ++j) {
      result.er.push_back(data::relational_error(result.samples.col(j), *relation, steps));
    }
    result.delta = relative_change(result.er, result.selected);
  }
  return result;
}

namespace {

constexpr std::uint64_t kScoreStream = 0x4d495447ULL;

}  // namespace

std::vector<MitigationResult> mitigate_batch(const diffusion::DiffusionModel& model,
                                             std::span<const diffusion::PromptSpec> prompts,
                                             std::span<const std::uint64_t> seeds,
                                             const MitigationOptions& options, const data::Relation* relation,
                                             Eigen::Index steps) {
  if (options.samples < 1) throw ConfigError("mitigation needs N >= 1 samples");
  if (prompts.size() != seeds.size()) throw ShapeError("one seed per prompt is required");
  model.require_trained();
  const auto n = static_cast<std::size_t>(options.samples);
  std::vector<diffusion::PromptSpec> expanded;
  std::vector<std::uint64_t> sample_seeds;
  expanded.reserve(prompts.size() * n);
  sample_seeds.reserve(prompts.size() * n);
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      expanded.push_back(prompts[k]);
      sample_seeds.push_back(diffusion::derive_seed(seeds[k], j));
    }
  }
  diffusion::ImputeOptions impute;
  impute.threads = options.threads;
  const Eigen::MatrixXd all = diffusion::repaint_impute_batch(model, expanded, sample_seeds, impute);

  std::vector<MitigationResult> results;
  results.reserve(prompts.size());
  const auto cols = static_cast<Eigen::Index>(n);
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    Eigen::MatrixXd samples = all.middleCols(static_cast<Eigen::Index>(k) * cols, cols);
    diffusion::Rng rng(diffusion::derive_seed(seeds[k], kScoreStream));
    const Eigen::VectorXd ce = metrics::combined_error_batch(model, samples, rng, options.ce_draws);
    results.push_back(select_scored(std::move(samples), std::vector<double>(ce.data(), ce.data() + ce.size()),
                                    relation, steps));
  }
  return results;
}

MitigationResult mitigate(const diffusion::DiffusionModel& model, const diffusion::PromptSpec& prompt,
                          std::uint64_t seed, const MitigationOptions& options, const data::Relation* relation,
                          Eigen::Index steps) {
  return mitigate_batch(model, std::span(&prompt, 1), std::span(&seed, 1), options, relation, steps).front();
}

}  // namespace relhal::halluc
