// SPDX-License-Identifier: Apache-2.0

#include "relhal/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "relhal/data/csv.hpp"
#include "relhal/error.hpp"

namespace relhal::metrics {

double rmse(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw ShapeError("RMSE operands differ in size");
  if (a.size() == 0) throw ConfigError("RMSE over an empty index set is undefined");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double combined_error_from(const data::Normalizer& normalizer,
                           const Eigen::Ref<const Eigen::VectorXd>& x_hat,
                           const Eigen::Ref<const Eigen::VectorXd>& x_hat_hat) {
  const Eigen::MatrixXd a = normalizer.normalize(x_hat_hat);
  const Eigen::MatrixXd b = normalizer.normalize(x_hat);
  return rmse(a.col(0), b.col(0));
}

double combined_error(const diffusion::DiffusionModel& model,
                      const Eigen::Ref<const Eigen::VectorXd>& x_hat, diffusion::Rng& rng, int draws) {
  return combined_error_batch(model, x_hat, rng, draws)(0);
}

Eigen::VectorXd combined_error_batch(const diffusion::DiffusionModel& model,
                                     const Eigen::MatrixXd& x_hat, diffusion::Rng& rng, int draws) {
  model.require_trained();
  if (draws < 1) throw ConfigError("combined error needs at least one noise draw");
  if (x_hat.rows() != model.dim()) throw ShapeError("prompt-response vector has the wrong dimension");
  const Eigen::Index dim = x_hat.rows();
  const Eigen::Index n = x_hat.cols();
  // Column-major draws: column j's noise follows column j - 1's.
  std::vector<Eigen::MatrixXd> noise(static_cast<std::size_t>(draws), Eigen::MatrixXd(dim, n));
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < n; ++j)
    for (auto& eps : noise)
      for (Eigen::Index i = 0; i < dim; ++i) eps(i, j) = normal(rng);

  const Eigen::MatrixXd z = model.normalizer().normalize(x_hat);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, n);
  for (const auto& eps : noise) mean += model.p_mean(diffusion::q_sample(model.schedule(), z, 1, eps), 1);
  mean /= static_cast<double>(draws);

  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) out(j) = rmse(mean.col(j), z.col(j));
  return out;
}

double prompt_error(const Eigen::Ref<const Eigen::VectorXd>& x_hat, const diffusion::PromptSpec& prompt) {
  if (x_hat.size() != prompt.dim()) throw ShapeError("output and prompt dimensions differ");
  const auto& idx = prompt.prompt_indices();
  if (idx.empty()) throw ConfigError("prompt error is undefined for an empty prompt");
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double d = x_hat(idx[k]) - prompt.prompt_values()[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(idx.size()));
}

void write_scored_pairs(std::ostream& out, std::span<const ScoredPair> pairs,
                        const std::string& config_hash) {
  auto opt = [](const std::optional<double>& v) { return v ? data::format_number(*v) : std::string(); };
  out << "# config_hash=" << config_hash << '\n';
  out << "window_id,task,model,ce,pe,tv,rts,pts,cts,er\n";
  for (const auto& p : pairs) {
    out << data::escape_csv(p.window_id) << ',' << data::escape_csv(p.task) << ','
        << data::escape_csv(p.model) << ',' << data::format_number(p.ce) << ',' << opt(p.pe) << ','
        << opt(p.tv) << ',' << opt(p.rts) << ',' << opt(p.pts) << ',' << opt(p.cts) << ','
        << opt(p.er) << '\n';
  }
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end + 1 < order.size() && v[order[end + 1]] == v[order[k]]) ++end;
    const double rank = 0.5 * static_cast<double>(k + end) + 1.0;
    for (std::size_t m = k; m <= end; ++m) ranks[order[m]] = rank;
    k = end + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ConfigError("spearman needs two equal samples of size >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    cov += (ra[k] - ma) * (rb[k] - mb);
    va += (ra[k] - ma) * (ra[k] - ma);
    vb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace relhal::metrics
