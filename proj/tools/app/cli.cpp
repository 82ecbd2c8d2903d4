// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "relhal/error.hpp"

namespace relhal::app {

namespace {

void add_dataset_flags(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--dataset", c.dataset, "ecl, wth, traffic, illness, ett or synthetic2d");
  cmd.add_option("--source", c.sources, "source CSV");
  cmd.add_option("--column0", c.column0, "first source column");
  cmd.add_option("--column1", c.column1, "second source column");
  cmd.add_option("--window", c.window);
  cmd.add_option("--stride", c.stride);
  cmd.add_option("--x0-scale", c.x0_scale);
  cmd.add_option("--x1-scale", c.x1_scale);
  cmd.add_option("--max-windows", c.max_windows, "keep only the first n windows");
  cmd.add_option("--points", c.synthetic_points, "synthetic2d point count");
  cmd.add_option("--noise", c.synthetic_noise, "synthetic2d noise std");
}

void add_model_flags(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--schedule-steps", c.schedule_steps);
  cmd.add_option("--beta-start", c.beta_start);
  cmd.add_option("--beta-end", c.beta_end);
  cmd.add_option("--embedding-dim", c.embedding_dim);
  cmd.add_option("--hidden-width", c.hidden_width);
  cmd.add_option("--hidden-layers", c.hidden_layers);
  cmd.add_option("--batch-size", c.train.batch_size);
  cmd.add_option("--max-epochs", c.train.max_epochs);
  cmd.add_option("--patience", c.train.patience);
  cmd.add_option("--validation-interval", c.train.validation_interval);
  cmd.add_option("--max-lr", c.train.max_lr);
  cmd.add_option("--checkpoint-interval", c.checkpoint_interval);
}

void add_eval_flags(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--samples", c.samples, "N responses per prompt for selection");
  cmd.add_option("--ce-draws", c.ce_draws);
  cmd.add_option("--threads", c.threads);
  cmd.add_option("--calibration-windows", c.calibration_windows, "cap on training windows used for quartiles");
  cmd.add_option("--eval-windows", c.eval_windows, "cap on evaluated windows");
  cmd.add_option("--overlap-bins", c.overlap_bins);
  cmd.add_flag("--trajectory-metrics", c.trajectory_metrics);
  cmd.add_option("--tasks", c.tasks)->delimiter(',');
  cmd.add_option("--split", c.split);
  cmd.add_option("--grid-nx", c.grid_nx);
  cmd.add_option("--grid-ny", c.grid_ny);
  cmd.add_option("--grid-min", c.grid_min);
  cmd.add_option("--grid-max", c.grid_max);
  cmd.add_option("--impute-samples", c.impute_samples, "responses written per prompt by impute");
}

// Scans for --config before the real parse so the file can seed the bound values.
std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
  }
  return {};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    if (const auto file = find_config(args); !file.empty()) config = RunConfig::load(file);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }

  CLI::App app{"Diffusion-based relational hallucination detection for multivariate time series", "relhal"};
  app.require_subcommand(1);
  std::string config_file;
  std::string write_config;
  std::function<void()> action;

  auto add = [&](const char* name, const char* help, auto body) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_file, "run config JSON; flags override its values");
    cmd->add_option("--write-config", write_config, "also save the effective config here");
    cmd->add_option("--seed", config.seed);
    cmd->add_option("--output-dir,-o", config.output_dir, "default: $RELHAL_OUTPUT_DIR or .");
    cmd->add_option("--windows", config.windows, "windows CSV (default <output>/windows.csv)");
    cmd->add_option("--checkpoint", config.checkpoint, "checkpoint (default <output>/model.ckpt)");
    cmd->add_option("--calibration", config.calibration, "calibration JSON (default <output>/calibration.json)");
    cmd->add_option("--responses", config.responses, "response CSV");
    cmd->add_option("--external", config.external, "external response CSVs");
    add_dataset_flags(*cmd, config);
    add_model_flags(*cmd, config);
    add_eval_flags(*cmd, config);
    cmd->callback([&, body] { action = [&, body] { body(); }; });
  };

  add("build-dataset", "build the windows file from a source CSV", [&] { cmd_build_dataset(config, out); });
  add("train", "train the noise model and write the best checkpoint", [&] { cmd_train(config, out); });
  add("impute", "answer task prompts for a split", [&] { cmd_impute(config, out); });
  add("score", "CE, relational and prompt error for a response file", [&] { cmd_score(config, out); });
  add("calibrate", "CE quartiles over the training split", [&] { cmd_calibrate(config, out); });
  add("classify", "hallucination level of each response", [&] { cmd_classify(config, out); });
  add("mitigate", "sample N responses (or read groups) and keep the lowest CE", [&] { cmd_mitigate(config, out); });
  add("benchmark", "relational error, detection overlap and selection tables", [&] { cmd_benchmark(config, out); });
  add("heatmap", "CE over a 2D grid", [&] { cmd_heatmap(config, out); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (!write_config.empty()) {
      std::ofstream f(write_config, std::ios::binary | std::ios::trunc);
      if (!f) throw DataError("cannot write " + write_config);
      f << config.to_json();
    }
    if (action) action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace relhal::app
