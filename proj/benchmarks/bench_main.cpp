// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <memory>

#include "relhal/data/normalizer.hpp"
#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/diffusion/sampler.hpp"
#include "relhal/diffusion/schedule.hpp"
#include "relhal/diffusion/trainer.hpp"
#include "relhal/metrics/metrics.hpp"
#include "relhal/nn/noise_net.hpp"
#include "relhal/tasks.hpp"

namespace {

using namespace relhal;

nn::NoiseNet default_net() { return nn::NoiseNet::create(nn::NoiseNetConfig{72, 64, 512, 5, 1}); }

diffusion::DiffusionModel default_model() {
  return diffusion::DiffusionModel(diffusion::VarianceSchedule::linear(1000, 1e-4, 1e-2),
                                   data::Normalizer::identity(72),
                                   std::make_shared<diffusion::MlpNoisePredictor>(default_net()));
}

void BM_NoiseNetForward(benchmark::State& state) {
  const auto net = default_net();
  const auto batch = state.range(0);
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(72, batch);
  const std::vector<int> steps(static_cast<std::size_t>(batch), 500);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, steps));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_NoiseNetForward)->Arg(1)->Arg(64)->Arg(1024);

void BM_TrainStep(benchmark::State& state) {
  const auto batch = state.range(0);
  diffusion::TrainConfig cfg;
  cfg.batch_size = static_cast<int>(batch);
  diffusion::Trainer trainer(default_net(), diffusion::VarianceSchedule::linear(1000, 1e-4, 1e-2), cfg, 1 << 20);
  const Eigen::MatrixXd x0 = Eigen::MatrixXd::Random(72, batch);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(x0));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(1024);

// One reverse step over a batch of prompts: the unit of RePaint cost.
void BM_ReverseStep(benchmark::State& state) {
  const auto model = default_model();
  const auto batch = state.range(0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(72, batch);
  for (auto _ : state) benchmark::DoNotOptimize(model.p_mean(x, 500));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ReverseStep)->Arg(1)->Arg(30);

void BM_RepaintImpute(benchmark::State& state) {
  const auto model = default_model();
  const Eigen::VectorXd window = Eigen::VectorXd::Random(72);
  const auto prompt = tasks::assemble_prompt(window, tasks::TaskKind::kFC);
  diffusion::Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(diffusion::repaint_impute(model, prompt, rng));
}
BENCHMARK(BM_RepaintImpute)->Unit(benchmark::kMillisecond);

void BM_CombinedErrorBatch(benchmark::State& state) {
  const auto model = default_model();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(72, state.range(0));
  diffusion::Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::combined_error_batch(model, x, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CombinedErrorBatch)->Arg(1)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
