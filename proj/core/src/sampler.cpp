// SPDX-License-Identifier: Apache-2.0

#include "relhal/diffusion/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "relhal/error.hpp"

namespace relhal::diffusion {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Stream {
  Rng* rng;
  std::normal_distribution<double> normal;

  double operator()() { return normal(*rng); }
};

// Runs the conditioned reverse pass for a block of prompts; column j of
// `out` and streams[j] belong to prompts[j].
void reverse_pass(const DiffusionModel& model, std::span<const PromptSpec> prompts,
                  std::span<Stream> streams, Eigen::Ref<Eigen::MatrixXd> out,
                  Trajectory* trajectories) {
  const auto& schedule = model.schedule();
  const auto& normalizer = model.normalizer();
  const Eigen::Index dim = model.dim();
  const auto batch = static_cast<Eigen::Index>(prompts.size());
  const int steps = schedule.steps();

  Eigen::MatrixXd clean(dim, batch);
  for (Eigen::Index b = 0; b < batch; ++b) clean.col(b) = prompts[static_cast<std::size_t>(b)].scatter();
  const Eigen::MatrixXd cond = normalizer.normalize(clean);

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    auto& stream = streams[static_cast<std::size_t>(b)];
    for (Eigen::Index i : prompts[static_cast<std::size_t>(b)].response_indices()) x(i, b) = stream();
  }
  if (trajectories) {
    for (Eigen::Index b = 0; b < batch; ++b) trajectories[b].means.resize(dim, steps);
  }

  for (int t = steps; t >= 1; --t) {
    const double signal = std::sqrt(schedule.alpha_bar(t));
    const double noise = std::sqrt(1.0 - schedule.alpha_bar(t));
    for (Eigen::Index b = 0; b < batch; ++b) {
      auto& stream = streams[static_cast<std::size_t>(b)];
      for (Eigen::Index i : prompts[static_cast<std::size_t>(b)].prompt_indices()) {
        x(i, b) = signal * cond(i, b) + noise * stream();
      }
    }
    const Eigen::MatrixXd mean = model.p_mean(x, t);
    if (!mean.allFinite()) {
      throw NumericalError("non-finite predicted mean at diffusion step " + std::to_string(t));
    }
    if (trajectories) {
      const Eigen::MatrixXd original = normalizer.denormalize(mean);
      for (Eigen::Index b = 0; b < batch; ++b) trajectories[b].means.col(t - 1) = original.col(b);
    }
    const double sigma = schedule.sigma(t);
    for (Eigen::Index b = 0; b < batch; ++b) {
      auto& stream = streams[static_cast<std::size_t>(b)];
      for (Eigen::Index i : prompts[static_cast<std::size_t>(b)].response_indices()) {
        x(i, b) = t > 1 ? mean(i, b) + sigma * stream() : mean(i, b);
      }
    }
  }

  out = normalizer.denormalize(x);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& p = prompts[static_cast<std::size_t>(b)];
    for (std::size_t k = 0; k < p.prompt_indices().size(); ++k) {
      out(p.prompt_indices()[k], b) = p.prompt_values()[k];
    }
  }
}

void check_prompt(const DiffusionModel& model, const PromptSpec& prompt) {
  if (prompt.dim() != model.dim()) {
    throw ShapeError("prompt dimension " + std::to_string(prompt.dim()) +
                     " does not match model dimension " + std::to_string(model.dim()));
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Eigen::VectorXd repaint_impute(const DiffusionModel& model, const PromptSpec& prompt, Rng& rng,
                               Trajectory* trajectory) {
  model.require_trained();
  check_prompt(model, prompt);
  if (prompt.response_indices().empty() && trajectory == nullptr) return prompt.scatter();
  Stream stream{&rng, {}};
  Eigen::MatrixXd out(model.dim(), 1);
  reverse_pass(model, std::span(&prompt, 1), std::span(&stream, 1), out, trajectory);
  return out.col(0);
}

Eigen::MatrixXd repaint_impute_batch(const DiffusionModel& model,
                                     std::span<const PromptSpec> prompts,
                                     std::span<const std::uint64_t> seeds,
                                     const ImputeOptions& options,
                                     std::vector<Trajectory>* trajectories) {
  model.require_trained();
  if (prompts.size() != seeds.size()) throw ShapeError("one seed per prompt required");
  for (const auto& p : prompts) check_prompt(model, p);
  const auto n = static_cast<Eigen::Index>(prompts.size());
  Eigen::MatrixXd out(model.dim(), n);
  if (n == 0) return out;

  const bool capture = options.capture_trajectory || trajectories != nullptr;
  if (trajectories) trajectories->assign(prompts.size(), Trajectory{});

  // Fast path: nothing to impute and no trajectory requested.
  const bool all_complete = std::all_of(prompts.begin(), prompts.end(), [](const PromptSpec& p) {
    return p.response_indices().empty();
  });
  if (all_complete && !capture && !options.run_when_complete) {
    for (Eigen::Index b = 0; b < n; ++b) out.col(b) = prompts[static_cast<std::size_t>(b)].scatter();
    return out;
  }

  std::vector<Rng> rngs;
  rngs.reserve(prompts.size());
  for (auto s : seeds) rngs.emplace_back(s);
  std::vector<Stream> streams;
  streams.reserve(prompts.size());
  for (auto& r : rngs) streams.push_back(Stream{&r, {}});

  const auto workers = static_cast<Eigen::Index>(std::clamp<Eigen::Index>(options.threads, 1, n));
  const Eigen::Index chunk = (n + workers - 1) / workers;
  auto run = [&](Eigen::Index begin, Eigen::Index end) {
    const auto b = static_cast<std::size_t>(begin);
    const auto len = static_cast<std::size_t>(end - begin);
    reverse_pass(model, prompts.subspan(b, len), std::span(streams).subspan(b, len),
                 out.middleCols(begin, end - begin),
                 trajectories ? trajectories->data() + begin : nullptr);
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    {
      std::vector<std::jthread> pool;
      for (Eigen::Index w = 0; w < workers; ++w) {
        const Eigen::Index begin = w * chunk;
        const Eigen::Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
          try {
            run(begin, end);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

Eigen::MatrixXd denoise_full_vector(const DiffusionModel& model, const Eigen::MatrixXd& x_hat,
                                    const Eigen::MatrixXd& eps) {
  model.require_trained();
  if (x_hat.rows() != model.dim()) throw ShapeError("prompt-response vector has the wrong dimension");
  const auto& normalizer = model.normalizer();
  const Eigen::MatrixXd x1 = q_sample(model.schedule(), normalizer.normalize(x_hat), 1, eps);
  return normalizer.denormalize(model.p_mean(x1, 1));
}

Eigen::MatrixXd denoise_full_vector(const DiffusionModel& model, const Eigen::MatrixXd& x_hat,
                                    Rng& rng, int draws) {
  if (draws < 1) throw ConfigError("denoise_full_vector needs at least one noise draw");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(x_hat.rows(), x_hat.cols());
  for (int k = 0; k < draws; ++k) {
    sum += denoise_full_vector(model, x_hat, standard_normal(x_hat.rows(), x_hat.cols(), rng));
  }
  return sum / static_cast<double>(draws);
}

}  // namespace relhal::diffusion
