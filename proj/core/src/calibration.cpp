// SPDX-License-Identifier: Apache-2.0

#include "relhal/halluc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relhal/diffusion/sampler.hpp"
#include "relhal/error.hpp"
#include "relhal/metrics/metrics.hpp"

namespace relhal::halluc {

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CalibrationQuartiles CalibrationQuartiles::from_values(std::span<const double> ce, std::string dataset,
                                                       std::string model_hash) {
  if (ce.size() < 4) throw ConfigError("calibration needs at least 4 CE values, got " + std::to_string(ce.size()));
  for (double v : ce) {
    if (!std::isfinite(v)) throw NumericalError("non-finite CE value in calibration set");
  }
  CalibrationQuartiles q{quantile(ce, 0.5), quantile(ce, 0.75), ce.size(), std::move(dataset),
                         std::move(model_hash)};
  q.validate();
  return q;
}

void CalibrationQuartiles::validate() const {
  if (n < 4) throw ConfigError("calibration quartiles need n >= 4");
  if (!std::isfinite(q2) || !std::isfinite(q3) || q2 > q3) {
    throw ConfigError("calibration quartiles must be finite with Q2 <= Q3");
  }
}

std::string CalibrationQuartiles::to_json() const {
  nlohmann::ordered_json j;
  j["q2"] = q2;
  j["q3"] = q3;
  j["n"] = n;
  j["dataset"] = dataset;
  j["model_hash"] = model_hash;
  return j.dump(2) + "\n";
}

CalibrationQuartiles CalibrationQuartiles::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CalibrationQuartiles q{j.at("q2").get<double>(), j.at("q3").get<double>(), j.at("n").get<std::size_t>(),
                           j.value("dataset", std::string()), j.value("model_hash", std::string())};
    q.validate();
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid calibration JSON: ") + e.what());
  }
}

std::string_view level_name(HallucinationLevel level) {
  switch (level) {
    case HallucinationLevel::kLow: return "low";
    case HallucinationLevel::kMedium: return "medium";
    case HallucinationLevel::kHigh: return "high";
  }
  return "unknown";
}

HallucinationLevel classify(double ce, const CalibrationQuartiles& quartiles) {
  if (ce < quartiles.q2) return HallucinationLevel::kLow;
  if (ce > quartiles.q3) return HallucinationLevel::kHigh;
  return HallucinationLevel::kMedium;
}

CalibrationRun calibrate(const diffusion::DiffusionModel& model, const Eigen::MatrixXd& train_windows,
                         int variables, Eigen::Index steps, const CalibrationOptions& options) {
  model.require_trained();
  if (train_windows.cols() < 4) throw ConfigError("calibration needs at least 4 training windows");
  if (train_windows.rows() != model.dim()) throw ShapeError("window and model dimensions differ");
  if (options.tasks.empty()) throw ConfigError("calibration needs at least one task");

  const Eigen::Index n = train_windows.cols();
  CalibrationRun run;
  run.ce.reserve(static_cast<std::size_t>(n) * options.tasks.size());
  std::uint64_t stream = 0;
  for (std::size_t k = 0; k < options.tasks.size(); ++k) {
    std::vector<diffusion::PromptSpec> prompts;
    std::vector<std::uint64_t> seeds;
    prompts.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      prompts.push_back(tasks::assemble_prompt(train_windows.col(j), options.tasks[k], variables, steps));
      seeds.push_back(diffusion::derive_seed(options.seed, stream++));
    }
    diffusion::ImputeOptions impute;
    impute.threads = options.threads;
    const Eigen::MatrixXd x_hat = diffusion::repaint_impute_batch(model, prompts, seeds, impute);
    diffusion::Rng rng(diffusion::derive_seed(options.seed, 0x43450000ULL + k));
    const Eigen::VectorXd ce = metrics::combined_error_batch(model, x_hat, rng, options.ce_draws);
    run.ce.insert(run.ce.end(), ce.data(), ce.data() + ce.size());
  }
  run.quartiles = CalibrationQuartiles::from_values(run.ce, options.dataset, options.model_hash);
  return run;
}

void save_calibration(const std::filesystem::path& path, const CalibrationQuartiles& quartiles) {
  quartiles.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write calibration file " + path.string());
  out << quartiles.to_json();
  if (!out) throw DataError("failed writing calibration file " + path.string());
}

CalibrationQuartiles load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open calibration file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return CalibrationQuartiles::from_json(buffer.str());
}

}  // namespace relhal::halluc
