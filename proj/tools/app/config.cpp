// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relhal/error.hpp"
#include "relhal/hash.hpp"

namespace relhal::app {

using nlohmann::ordered_json;

data::DatasetKind RunConfig::kind() const { return data::parse_dataset_kind(dataset); }

data::BuildOptions RunConfig::build_options() const {
  data::BuildOptions opt;
  opt.window = window;
  opt.stride = stride;
  opt.x0_scale = x0_scale.value_or(1.0);
  // Relative humidity sources are in percent; the relation wants a fraction.
  opt.x1_scale = x1_scale.value_or(kind() == data::DatasetKind::kWTH ? 0.01 : 1.0);
  return opt;
}

nn::NoiseNetConfig RunConfig::network_config(Eigen::Index data_dim) const {
  nn::NoiseNetConfig cfg;
  cfg.data_dim = data_dim;
  cfg.embedding_dim = embedding_dim;
  cfg.hidden_width = hidden_width;
  cfg.hidden_layers = hidden_layers;
  cfg.seed = seed;
  return cfg;
}

diffusion::TrainConfig RunConfig::train_config() const {
  diffusion::TrainConfig cfg = train;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

std::filesystem::path RunConfig::output_path() const {
  if (!output_dir.empty()) return output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

std::filesystem::path RunConfig::windows_path() const {
  return windows.empty() ? output_path() / "windows.csv" : std::filesystem::path(windows);
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_path() / "model.ckpt" : std::filesystem::path(checkpoint);
}

std::filesystem::path RunConfig::calibration_path() const {
  return calibration.empty() ? output_path() / "calibration.json" : std::filesystem::path(calibration);
}

namespace {

ordered_json train_json(const diffusion::TrainConfig& t) {
  ordered_json j;
  j["batch_size"] = t.batch_size;
  j["max_epochs"] = t.max_epochs;
  j["patience"] = t.patience;
  j["validation_interval"] = t.validation_interval;
  j["max_lr"] = t.max_lr;
  j["warmup_fraction"] = t.warmup_fraction;
  j["initial_divisor"] = t.initial_divisor;
  j["final_divisor"] = t.final_divisor;
  j["adam_beta1"] = t.adam.beta1;
  j["adam_beta2"] = t.adam.beta2;
  j["adam_eps"] = t.adam.epsilon;
  return j;
}

template <typename T>
void read(const ordered_json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void read_optional(const ordered_json& j, const char* key, std::optional<double>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    field.reset();
  } else {
    field = j.at(key).get<double>();
  }
}

}  // namespace

std::string RunConfig::to_json(bool include_locations) const {
  ordered_json j;
  j["dataset"] = dataset;
  j["column0"] = column0;
  j["column1"] = column1;
  j["window"] = window;
  j["stride"] = stride;
  j["x0_scale"] = x0_scale ? ordered_json(*x0_scale) : ordered_json(nullptr);
  j["x1_scale"] = x1_scale ? ordered_json(*x1_scale) : ordered_json(nullptr);
  j["max_windows"] = max_windows;
  j["synthetic_points"] = synthetic_points;
  j["synthetic_noise"] = synthetic_noise;
  j["schedule_steps"] = schedule_steps;
  j["beta_start"] = beta_start;
  j["beta_end"] = beta_end;
  j["embedding_dim"] = embedding_dim;
  j["hidden_width"] = hidden_width;
  j["hidden_layers"] = hidden_layers;
  j["train"] = train_json(train);
  j["checkpoint_interval"] = checkpoint_interval;
  j["seed"] = seed;
  j["samples"] = samples;
  j["impute_samples"] = impute_samples;
  j["ce_draws"] = ce_draws;
  j["threads"] = threads;
  j["calibration_windows"] = calibration_windows;
  j["eval_windows"] = eval_windows;
  j["overlap_bins"] = overlap_bins;
  j["trajectory_metrics"] = trajectory_metrics;
  j["tasks"] = tasks;
  j["split"] = split;
  j["grid_nx"] = grid_nx;
  j["grid_ny"] = grid_ny;
  j["grid_min"] = grid_min;
  j["grid_max"] = grid_max;
  if (include_locations) {
    j["sources"] = sources;
    j["output_dir"] = output_dir;
    j["windows"] = windows;
    j["checkpoint"] = checkpoint;
    j["calibration"] = calibration;
    j["responses"] = responses;
    j["external"] = external;
  }
  return j.dump(2) + "\n";
}

namespace {

// Typos in a config file would otherwise silently fall back to defaults.
void reject_unknown_keys(const ordered_json& j) {
  const auto known = ordered_json::parse(RunConfig{}.to_json(true));
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown run config key '" + key + "'");
    if (key == "train" && value.is_object()) {
      for (const auto& [sub, unused] : value.items()) {
        if (!known.at("train").contains(sub)) throw ConfigError("unknown run config key 'train." + sub + "'");
      }
    }
  }
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text, const RunConfig& defaults) {
  RunConfig c = defaults;
  try {
    const auto j = ordered_json::parse(text);
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    reject_unknown_keys(j);
    read(j, "dataset", c.dataset);
    read(j, "sources", c.sources);
    read(j, "column0", c.column0);
    read(j, "column1", c.column1);
    read(j, "window", c.window);
    read(j, "stride", c.stride);
    read_optional(j, "x0_scale", c.x0_scale);
    read_optional(j, "x1_scale", c.x1_scale);
    read(j, "max_windows", c.max_windows);
    read(j, "synthetic_points", c.synthetic_points);
    read(j, "synthetic_noise", c.synthetic_noise);
    read(j, "schedule_steps", c.schedule_steps);
    read(j, "beta_start", c.beta_start);
    read(j, "beta_end", c.beta_end);
    read(j, "embedding_dim", c.embedding_dim);
    read(j, "hidden_width", c.hidden_width);
    read(j, "hidden_layers", c.hidden_layers);
    if (j.contains("train")) {
      const auto& t = j.at("train");
      read(t, "batch_size", c.train.batch_size);
      read(t, "max_epochs", c.train.max_epochs);
      read(t, "patience", c.train.patience);
      read(t, "validation_interval", c.train.validation_interval);
      read(t, "max_lr", c.train.max_lr);
      read(t, "warmup_fraction", c.train.warmup_fraction);
      read(t, "initial_divisor", c.train.initial_divisor);
      read(t, "final_divisor", c.train.final_divisor);
      read(t, "adam_beta1", c.train.adam.beta1);
      read(t, "adam_beta2", c.train.adam.beta2);
      read(t, "adam_eps", c.train.adam.epsilon);
    }
    read(j, "checkpoint_interval", c.checkpoint_interval);
    read(j, "seed", c.seed);
    read(j, "samples", c.samples);
    read(j, "impute_samples", c.impute_samples);
    read(j, "ce_draws", c.ce_draws);
    read(j, "threads", c.threads);
    read(j, "calibration_windows", c.calibration_windows);
    read(j, "eval_windows", c.eval_windows);
    read(j, "overlap_bins", c.overlap_bins);
    read(j, "trajectory_metrics", c.trajectory_metrics);
    read(j, "tasks", c.tasks);
    read(j, "split", c.split);
    read(j, "grid_nx", c.grid_nx);
    read(j, "grid_ny", c.grid_ny);
    read(j, "grid_min", c.grid_min);
    read(j, "grid_max", c.grid_max);
    read(j, "output_dir", c.output_dir);
    read(j, "windows", c.windows);
    read(j, "checkpoint", c.checkpoint);
    read(j, "calibration", c.calibration);
    read(j, "responses", c.responses);
    read(j, "external", c.external);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const RunConfig& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_json(buffer.str(), defaults);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string RunConfig::hash() const { return hash_text(to_json(false)); }

}  // namespace relhal::app
