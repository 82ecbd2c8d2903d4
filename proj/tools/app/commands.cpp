// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "relhal/data/csv.hpp"
#include "relhal/diffusion/checkpoint.hpp"
#include "relhal/diffusion/sampler.hpp"
#include "relhal/error.hpp"
#include "relhal/halluc/baseline.hpp"
#include "relhal/halluc/external.hpp"
#include "relhal/halluc/mitigation.hpp"
#include "relhal/hash.hpp"
#include "relhal/metrics/metrics.hpp"
#include "relhal/metrics/overlap.hpp"
#include "relhal/tasks.hpp"

namespace relhal::app {

namespace fs = std::filesystem;
using data::format_number;

namespace {

// Seed streams derived from the run seed, one per independent random use.
enum Stream : std::uint64_t {
  kCalibrationStream = 1,
  kImputeStream = 2,
  kScoreStream = 3,
  kMitigationStream = 4,
  kTrajectoryStream = 5,
  kExternalStream = 6,
  kHeatmapStream = 7,
  kBaselineStream = 8,
};

std::uint64_t stream_seed(const RunConfig& config, Stream s, std::uint64_t sub = 0) {
  return diffusion::derive_seed(diffusion::derive_seed(config.seed, s), sub);
}

struct LoadedModel {
  diffusion::Checkpoint checkpoint;
  diffusion::DiffusionModel model;
  std::string hash;
  data::Relation relation;
  int variables = 0;
  Eigen::Index steps = 0;
};

LoadedModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::stringstream bytes;
  bytes << in.rdbuf();
  const std::string blob = bytes.str();
  std::istringstream stream(blob);
  auto ckpt = diffusion::read_checkpoint(stream, path.string());
  auto model = ckpt.to_model();
  const data::Relation relation(data::parse_dataset_kind(ckpt.dataset));
  const int variables = ckpt.normalizer.variables();
  const Eigen::Index steps = ckpt.normalizer.dim() / variables;
  return {std::move(ckpt), std::move(model), hash_text(blob), relation, variables, steps};
}

fs::path ensure_output(const RunConfig& config) {
  const fs::path dir = config.output_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_csv(const fs::path& path, const std::string& config_hash, const std::string& header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "# config_hash=" << config_hash << '\n' << header << '\n';
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

std::string number_or_empty(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

data::IndexRange split_range(const data::WindowsFile& wf, const std::string& name) {
  if (name == "train") return wf.split.train;
  if (name == "validation" || name == "val") return wf.split.validation;
  if (name == "test") return wf.split.test;
  if (name == "all") return {0, wf.dataset.count()};
  throw ConfigError("unknown split '" + name + "' (train, validation, test, all)");
}

data::IndexRange capped(data::IndexRange range, std::int64_t cap) {
  if (cap > 0 && range.size() > cap) range.end = range.begin + cap;
  return range;
}

std::vector<tasks::TaskKind> parse_tasks(const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("at least one task is required");
  std::vector<tasks::TaskKind> out;
  for (const auto& n : names) out.push_back(tasks::parse_task(n));
  return out;
}

void check_compatible(const LoadedModel& lm, const data::WindowsFile& wf) {
  if (wf.dataset.dim() != lm.model.dim() || wf.dataset.variables != lm.variables) {
    throw ConfigError("windows file and checkpoint dimensions differ");
  }
  if (data::dataset_name(wf.dataset.kind) != lm.checkpoint.dataset) {
    throw ConfigError("windows file holds " + std::string(data::dataset_name(wf.dataset.kind)) +
                      " but the checkpoint was trained on " + lm.checkpoint.dataset);
  }
}

std::vector<double> column_errors(const Eigen::MatrixXd& x, const data::Relation& relation, Eigen::Index steps) {
  std::vector<double> er(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) er[static_cast<std::size_t>(j)] = data::relational_error(x.col(j), relation, steps);
  return er;
}

std::optional<Eigen::Index> parse_index(const std::string& s) {
  Eigen::Index v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) return std::nullopt;
  return v;
}

double mean_of(std::span<const double> v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

struct ScoredExternal {
  halluc::ExternalIngest ingest;
  Eigen::MatrixXd x;
  Eigen::VectorXd ce;
  std::vector<double> er;
};

ScoredExternal score_external(const LoadedModel& lm, const fs::path& path, const RunConfig& config,
                              std::uint64_t stream, std::ostream& log) {
  ScoredExternal s;
  s.ingest = halluc::ingest_external_responses(path, lm.model.dim());
  for (const auto& r : s.ingest.rejected) log << path.string() << ":" << r.line << ": rejected: " << r.reason << '\n';
  const auto n = static_cast<Eigen::Index>(s.ingest.responses.size());
  s.x.resize(lm.model.dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) s.x.col(j) = s.ingest.responses[static_cast<std::size_t>(j)].values;
  if (n > 0) {
    diffusion::Rng rng(stream_seed(config, kExternalStream, stream));
    s.ce = metrics::combined_error_batch(lm.model, s.x, rng, config.ce_draws);
  }
  s.er = column_errors(s.x, lm.relation, lm.steps);
  return s;
}

void write_rejected(const fs::path& path, const std::string& hash, const halluc::ExternalIngest& ingest) {
  auto out = open_csv(path, hash, "line,reason");
  for (const auto& r : ingest.rejected) out << r.line << ',' << data::escape_csv(r.reason) << '\n';
  finish(out, path);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 1;
  return 2;
}

BuildDatasetResult cmd_build_dataset(const RunConfig& config, std::ostream& log) {
  const auto kind = config.kind();
  data::RelationalDataset ds;
  if (kind == data::DatasetKind::kSynthetic2d) {
    ds = data::make_synthetic2d(config.synthetic_points, config.synthetic_noise, config.seed);
  } else {
    if (config.sources.size() != 1) throw ConfigError("build-dataset needs exactly one source CSV");
    auto [c0, c1] = data::default_source_columns(kind);
    const auto raw = data::load_raw_series(config.sources.front(), config.column0.empty() ? c0 : config.column0,
                                           config.column1.empty() ? c1 : config.column1);
    ds = data::build_relational(raw, kind, config.build_options());
  }
  if (config.max_windows > 0 && ds.count() > config.max_windows) {
    const auto n = static_cast<Eigen::Index>(config.max_windows);
    ds.windows.conservativeResize(Eigen::NoChange, n);
    ds.starts.resize(static_cast<std::size_t>(n));
    ds.start_rows.resize(static_cast<std::size_t>(n));
  }
  const auto split = data::split_chrono(ds.count());
  const fs::path dir = ensure_output(config);
  BuildDatasetResult result{config.windows_path(), ds.count(), split, ds.report};
  if (result.windows.has_parent_path()) fs::create_directories(result.windows.parent_path());
  data::write_windows(result.windows, ds, split, config.hash(), "{\"config\":" + config.to_json(false) + "}");
  log << "wrote " << ds.count() << " windows (" << split.train.size() << "/" << split.validation.size() << "/"
      << split.test.size() << ") to " << result.windows.string() << '\n';
  if (ds.report.dropped_rows > 0) {
    log << "dropped " << ds.report.dropped_rows << " rows with missing values, discarded "
        << ds.report.discarded_windows << " windows\n";
  }
  (void)dir;
  return result;
}

TrainSummary cmd_train(const RunConfig& config, std::ostream& log) {
  const auto wf = data::read_windows(config.windows_path());
  const auto& ds = wf.dataset;
  const Eigen::MatrixXd train_raw = ds.slice(wf.split.train);
  const Eigen::MatrixXd val_raw = ds.slice(wf.split.validation);
  if (train_raw.cols() < 1 || val_raw.cols() < 1) throw DataError("train and validation splits must be non-empty");
  const auto normalizer = data::Normalizer::fit(train_raw, ds.variables, ds.steps);
  const Eigen::MatrixXd train_x0 = normalizer.normalize(train_raw);
  const Eigen::MatrixXd val_x0 = normalizer.normalize(val_raw);
  const auto schedule = diffusion::VarianceSchedule::linear(config.schedule_steps, config.beta_start, config.beta_end);
  const auto tcfg = config.train_config();
  auto net = nn::NoiseNet::create(config.network_config(ds.dim()));

  ensure_output(config);
  TrainSummary summary;
  summary.checkpoint = config.checkpoint_path();
  summary.curve = config.output_path() / "training_curve.csv";

  diffusion::Checkpoint ckpt;
  ckpt.schedule_steps = config.schedule_steps;
  ckpt.beta_start = config.beta_start;
  ckpt.beta_end = config.beta_end;
  ckpt.normalizer = normalizer;
  ckpt.dataset = std::string(data::dataset_name(ds.kind));
  ckpt.seed = config.seed;

  int last_saved = -1;
  auto on_epoch = [&](const diffusion::EpochRecord& rec, const nn::NoiseNet& best) {
    if (rec.improved && (last_saved < 0 || rec.epoch - last_saved >= config.checkpoint_interval)) {
      ckpt.network = best;
      ckpt.best_epoch = rec.epoch;
      ckpt.best_val_loss = rec.val_loss;
      diffusion::save_checkpoint(summary.checkpoint, ckpt);
      last_saved = rec.epoch;
    }
    if (rec.epoch % 100 == 0) {
      log << "epoch " << rec.epoch << " train " << rec.train_loss << " val " << rec.val_loss << " lr " << rec.lr
          << '\n';
    }
  };
  auto result = diffusion::train(std::move(net), schedule, train_x0, val_x0, tcfg, on_epoch);

  ckpt.network = result.best;
  ckpt.best_epoch = result.best_epoch;
  ckpt.best_val_loss = result.best_val_loss;
  diffusion::save_checkpoint(summary.checkpoint, ckpt);

  auto out = open_csv(summary.curve, config.hash(), "epoch,step,train_loss,val_loss,lr,improved");
  for (const auto& r : result.curve) {
    out << r.epoch << ',' << r.step << ',' << format_number(r.train_loss) << ',' << format_number(r.val_loss) << ','
        << format_number(r.lr) << ',' << (r.improved ? 1 : 0) << '\n';
  }
  finish(out, summary.curve);

  summary.epochs = static_cast<int>(result.curve.size());
  summary.best_epoch = result.best_epoch;
  summary.best_val_loss = result.best_val_loss;
  summary.early_stopped = result.early_stopped;
  summary.initial_val_loss = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : result.curve) {
    if (std::isfinite(r.val_loss)) {
      summary.initial_val_loss = r.val_loss;
      break;
    }
  }
  log << "best validation loss " << result.best_val_loss << " at epoch " << result.best_epoch << " after "
      << summary.epochs << " epochs" << (result.early_stopped ? " (early stop)" : "") << '\n';
  return summary;
}

fs::path cmd_impute(const RunConfig& config, std::ostream& log) {
  const auto lm = load_model(config.checkpoint_path());
  const auto wf = data::read_windows(config.windows_path());
  check_compatible(lm, wf);
  if (config.impute_samples < 1) throw ConfigError("impute needs at least one sample per prompt");
  const auto range = capped(split_range(wf, config.split), config.eval_windows);
  const auto task_list = parse_tasks(config.tasks);
  const auto per = static_cast<std::size_t>(config.impute_samples);

  std::vector<diffusion::PromptSpec> prompts;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<Eigen::Index, tasks::TaskKind>> owner;
  for (auto task : task_list) {
    for (Eigen::Index w = range.begin; w < range.end; ++w) {
      const auto prompt = tasks::assemble_prompt(wf.dataset.windows.col(w), task, lm.variables, lm.steps);
      for (std::size_t s = 0; s < per; ++s) {
        seeds.push_back(stream_seed(config, kImputeStream, prompts.size()));
        prompts.push_back(prompt);
        owner.emplace_back(w, task);
      }
    }
  }
  diffusion::ImputeOptions opt;
  opt.threads = config.threads;
  const Eigen::MatrixXd x = diffusion::repaint_impute_batch(lm.model, prompts, seeds, opt);

  ensure_output(config);
  const fs::path path = config.responses.empty() ? config.output_path() / "responses.csv" : fs::path(config.responses);
  std::string header = "window_id,task,model,group";
  for (Eigen::Index i = 0; i < x.rows(); ++i) header += ",x" + std::to_string(i);
  auto out = open_csv(path, config.hash(), header);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto& [w, task] = owner[static_cast<std::size_t>(j)];
    out << w << ',' << tasks::task_name(task) << ",dm,0";
    for (Eigen::Index i = 0; i < x.rows(); ++i) out << ',' << format_number(x(i, j));
    out << '\n';
  }
  finish(out, path);
  log << "wrote " << x.cols() << " responses to " << path.string() << '\n';
  return path;
}

fs::path cmd_score(const RunConfig& config, std::ostream& log) {
  if (config.responses.empty()) throw ConfigError("score needs a responses file");
  const auto lm = load_model(config.checkpoint_path());
  std::optional<data::WindowsFile> wf;
  if (fs::exists(config.windows_path())) {
    wf = data::read_windows(config.windows_path());
    check_compatible(lm, *wf);
  }
  auto scored = score_external(lm, config.responses, config, 0, log);
  std::vector<metrics::ScoredPair> pairs;
  for (std::size_t k = 0; k < scored.ingest.responses.size(); ++k) {
    const auto& r = scored.ingest.responses[k];
    metrics::ScoredPair p;
    p.window_id = r.window_id;
    p.task = r.task;
    p.model = r.model;
    p.x_hat = r.values;
    p.ce = scored.ce(static_cast<Eigen::Index>(k));
    p.er = scored.er[k];
    const auto w = parse_index(r.window_id);
    if (wf && w && *w < wf->dataset.count()) {
      const auto prompt =
          tasks::assemble_prompt(wf->dataset.windows.col(*w), tasks::parse_task(r.task), lm.variables, lm.steps);
      p.pe = metrics::prompt_error(r.values, prompt);
    }
    if (config.trajectory_metrics) {
      diffusion::Rng rng(stream_seed(config, kTrajectoryStream, k));
      p.cts = metrics::combined_trajectory_spread(lm.model, r.values, rng);
    }
    pairs.push_back(std::move(p));
  }
  ensure_output(config);
  const fs::path path = config.output_path() / "scored.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  metrics::write_scored_pairs(out, pairs, config.hash());
  finish(out, path);
  write_rejected(config.output_path() / "rejected.csv", config.hash(), scored.ingest);
  log << "scored " << pairs.size() << " pairs, rejected " << scored.ingest.rejected.size() << '\n';
  return path;
}

halluc::CalibrationQuartiles cmd_calibrate(const RunConfig& config, std::ostream& log) {
  const auto lm = load_model(config.checkpoint_path());
  const auto wf = data::read_windows(config.windows_path());
  check_compatible(lm, wf);
  const auto range = capped(wf.split.train, config.calibration_windows);
  halluc::CalibrationOptions opt;
  opt.tasks = parse_tasks(config.tasks);
  opt.ce_draws = config.ce_draws;
  opt.threads = config.threads;
  opt.seed = stream_seed(config, kCalibrationStream);
  opt.dataset = lm.checkpoint.dataset;
  opt.model_hash = lm.hash;
  const auto run = halluc::calibrate(lm.model, wf.dataset.slice(range), lm.variables, lm.steps, opt);

  ensure_output(config);
  halluc::save_calibration(config.calibration_path(), run.quartiles);
  const fs::path path = config.output_path() / "calibration_ce.csv";
  auto out = open_csv(path, config.hash(), "window_id,task,ce");
  std::size_t k = 0;
  for (auto task : opt.tasks) {
    for (Eigen::Index w = range.begin; w < range.end; ++w) {
      out << w << ',' << tasks::task_name(task) << ',' << format_number(run.ce[k++]) << '\n';
    }
  }
  finish(out, path);
  log << "Q2 " << run.quartiles.q2 << " Q3 " << run.quartiles.q3 << " from " << run.quartiles.n << " pairs\n";
  return run.quartiles;
}

fs::path cmd_classify(const RunConfig& config, std::ostream& log) {
  if (config.responses.empty()) throw ConfigError("classify needs a responses file");
  const auto lm = load_model(config.checkpoint_path());
  const auto quartiles = halluc::load_calibration(config.calibration_path());
  auto scored = score_external(lm, config.responses, config, 0, log);
  ensure_output(config);
  const fs::path path = config.output_path() / "classified.csv";
  auto out = open_csv(path, config.hash(), "window_id,task,model,group,ce,er,level");
  std::array<std::size_t, 3> counts{};
  for (std::size_t k = 0; k < scored.ingest.responses.size(); ++k) {
    const auto& r = scored.ingest.responses[k];
    const double ce = scored.ce(static_cast<Eigen::Index>(k));
    const auto level = halluc::classify(ce, quartiles);
    ++counts[static_cast<std::size_t>(level)];
    out << data::escape_csv(r.window_id) << ',' << data::escape_csv(r.task) << ',' << data::escape_csv(r.model) << ','
        << data::escape_csv(r.group) << ',' << format_number(ce) << ',' << format_number(scored.er[k]) << ','
        << halluc::level_name(level) << '\n';
  }
  finish(out, path);
  write_rejected(config.output_path() / "rejected.csv", config.hash(), scored.ingest);
  log << "low " << counts[0] << " medium " << counts[1] << " high " << counts[2] << '\n';
  return path;
}

namespace {

const char* kMitigationHeader = "window_id,task,model,group,n,selected,ce_selected,er_selected,er_mean,delta";

void write_mitigation_row(std::ostream& out, const std::string& window, const std::string& task,
                          const std::string& model, const std::string& group, const halluc::MitigationResult& m) {
  out << data::escape_csv(window) << ',' << data::escape_csv(task) << ',' << data::escape_csv(model) << ','
      << data::escape_csv(group) << ',' << m.ce.size() << ',' << m.selected << ',' << format_number(m.ce[m.selected])
      << ',' << format_number(m.er[m.selected]) << ',' << format_number(mean_of(m.er)) << ','
      << number_or_empty(m.delta) << '\n';
}

struct DmMitigation {
  std::vector<Eigen::Index> windows;
  std::vector<halluc::MitigationResult> results;
};

DmMitigation dm_mitigation(const LoadedModel& lm, const data::WindowsFile& wf, data::IndexRange range,
                           tasks::TaskKind task, std::size_t task_index, const RunConfig& config) {
  DmMitigation out;
  std::vector<diffusion::PromptSpec> prompts;
  std::vector<std::uint64_t> seeds;
  for (Eigen::Index w = range.begin; w < range.end; ++w) {
    prompts.push_back(tasks::assemble_prompt(wf.dataset.windows.col(w), task, lm.variables, lm.steps));
    seeds.push_back(stream_seed(config, kMitigationStream, task_index * 1000003ULL + static_cast<std::uint64_t>(w)));
    out.windows.push_back(w);
  }
  halluc::MitigationOptions opt;
  opt.samples = config.samples;
  opt.ce_draws = config.ce_draws;
  opt.threads = config.threads;
  out.results = halluc::mitigate_batch(lm.model, prompts, seeds, opt, &lm.relation, lm.steps);
  return out;
}

}  // namespace

fs::path cmd_mitigate(const RunConfig& config, std::ostream& log) {
  const auto lm = load_model(config.checkpoint_path());
  ensure_output(config);
  const fs::path path = config.output_path() / "mitigation.csv";
  auto out = open_csv(path, config.hash(), kMitigationHeader);
  std::size_t rows = 0;
  if (!config.responses.empty()) {
    auto scored = score_external(lm, config.responses, config, 0, log);
    for (const auto& [key, members] : halluc::group_responses(scored.ingest.responses)) {
      Eigen::MatrixXd samples(lm.model.dim(), static_cast<Eigen::Index>(members.size()));
      std::vector<double> ce;
      for (std::size_t m = 0; m < members.size(); ++m) {
        samples.col(static_cast<Eigen::Index>(m)) = scored.x.col(static_cast<Eigen::Index>(members[m]));
        ce.push_back(scored.ce(static_cast<Eigen::Index>(members[m])));
      }
      const auto result = halluc::select_scored(std::move(samples), std::move(ce), &lm.relation, lm.steps);
      const auto& [window, task, model, group] = key;
      write_mitigation_row(out, window, task, model, group, result);
      ++rows;
    }
    write_rejected(config.output_path() / "rejected.csv", config.hash(), scored.ingest);
  } else {
    const auto wf = data::read_windows(config.windows_path());
    check_compatible(lm, wf);
    const auto range = capped(split_range(wf, config.split), config.eval_windows);
    const auto task_list = parse_tasks(config.tasks);
    for (std::size_t k = 0; k < task_list.size(); ++k) {
      const auto dm = dm_mitigation(lm, wf, range, task_list[k], k, config);
      for (std::size_t p = 0; p < dm.results.size(); ++p) {
        write_mitigation_row(out, std::to_string(dm.windows[p]), std::string(tasks::task_name(task_list[k])), "dm", "",
                             dm.results[p]);
        ++rows;
      }
    }
  }
  finish(out, path);
  log << "wrote " << rows << " mitigation rows to " << path.string() << '\n';
  return path;
}

BenchmarkResult cmd_benchmark(const RunConfig& config, std::ostream& log) {
  const auto lm = load_model(config.checkpoint_path());
  const auto wf = data::read_windows(config.windows_path());
  check_compatible(lm, wf);
  const auto task_list = parse_tasks(config.tasks);
  const std::string hash = config.hash();
  const fs::path dir = ensure_output(config);
  BenchmarkResult result;

  // Quartiles from the training split.
  halluc::CalibrationOptions copt;
  copt.tasks = task_list;
  copt.ce_draws = config.ce_draws;
  copt.threads = config.threads;
  copt.seed = stream_seed(config, kCalibrationStream);
  copt.dataset = lm.checkpoint.dataset;
  copt.model_hash = lm.hash;
  const auto train_range = capped(wf.split.train, config.calibration_windows);
  result.quartiles = halluc::calibrate(lm.model, wf.dataset.slice(train_range), lm.variables, lm.steps, copt).quartiles;
  halluc::save_calibration(dir / "calibration.json", result.quartiles);
  result.files.push_back(dir / "calibration.json");
  log << "calibration Q2 " << result.quartiles.q2 << " Q3 " << result.quartiles.q3 << '\n';

  struct Row {
    std::string model;
    std::string task;
    std::string window;
    double er = 0.0;
    double ce = 0.0;
    std::optional<double> pe{}, tv{}, rts{}, pts{}, cts{};
  };
  std::vector<Row> rows;
  const auto range = capped(split_range(wf, config.split), config.eval_windows);
  const Eigen::Index n = range.size();
  if (n < 1) throw DataError("evaluation split is empty");

  for (std::size_t k = 0; k < task_list.size(); ++k) {
    const auto task = task_list[k];
    const std::string tname(tasks::task_name(task));
    std::vector<diffusion::PromptSpec> prompts;
    std::vector<std::uint64_t> seeds;
    Eigen::MatrixXd baseline(lm.model.dim(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      prompts.push_back(tasks::assemble_prompt(wf.dataset.windows.col(range.begin + j), task, lm.variables, lm.steps));
      seeds.push_back(stream_seed(config, kImputeStream, k * 1000003ULL + static_cast<std::uint64_t>(range.begin + j)));
      baseline.col(j) = halluc::baseline_respond(lm.model.normalizer(), prompts.back());
    }
    diffusion::ImputeOptions opt;
    opt.threads = config.threads;
    opt.capture_trajectory = config.trajectory_metrics;
    std::vector<diffusion::Trajectory> trajectories;
    const Eigen::MatrixXd x = diffusion::repaint_impute_batch(lm.model, prompts, seeds, opt,
                                                             config.trajectory_metrics ? &trajectories : nullptr);
    diffusion::Rng ce_rng(stream_seed(config, kScoreStream, k));
    const Eigen::VectorXd ce = metrics::combined_error_batch(lm.model, x, ce_rng, config.ce_draws);
    diffusion::Rng base_rng(stream_seed(config, kBaselineStream, k));
    const Eigen::VectorXd base_ce = metrics::combined_error_batch(lm.model, baseline, base_rng, config.ce_draws);
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::string window = std::to_string(range.begin + j);
      const auto& prompt = prompts[static_cast<std::size_t>(j)];
      Row r;
      r.model = "dm";
      r.task = tname;
      r.window = window;
      r.er = data::relational_error(x.col(j), lm.relation, lm.steps);
      r.ce = ce(j);
      r.pe = metrics::prompt_error(x.col(j), prompt);
      if (config.trajectory_metrics) {
        const auto& traj = trajectories[static_cast<std::size_t>(j)];
        r.tv = metrics::trajectory_variance(traj);
        if (!prompt.response_indices().empty()) r.rts = metrics::response_trajectory_spread(traj, prompt.response_indices());
        r.pts = metrics::prompt_trajectory_spread(traj, prompt);
        diffusion::Rng rng(stream_seed(config, kTrajectoryStream, k * 1000003ULL + static_cast<std::uint64_t>(j)));
        r.cts = metrics::combined_trajectory_spread(lm.model, x.col(j), rng);
      }
      rows.push_back(std::move(r));
      Row b;
      b.model = "baseline";
      b.task = tname;
      b.window = window;
      b.er = data::relational_error(baseline.col(j), lm.relation, lm.steps);
      b.ce = base_ce(j);
      b.pe = metrics::prompt_error(baseline.col(j), prompt);
      rows.push_back(std::move(b));
    }
    log << "task " << tname << ": imputed " << n << " prompts\n";
  }

  // External responses: scored like the model's own, grouped for selection.
  std::map<std::string, std::array<std::vector<double>, 3>> deltas;
  for (std::size_t f = 0; f < config.external.size(); ++f) {
    auto scored = score_external(lm, config.external[f], config, f, log);
    for (std::size_t k = 0; k < scored.ingest.responses.size(); ++k) {
      const auto& r = scored.ingest.responses[k];
      Row row;
      row.model = r.model;
      row.task = std::string(tasks::task_name(tasks::parse_task(r.task)));
      row.window = r.window_id;
      row.er = scored.er[k];
      row.ce = scored.ce(static_cast<Eigen::Index>(k));
      rows.push_back(std::move(row));
    }
    for (const auto& [key, members] : halluc::group_responses(scored.ingest.responses)) {
      if (members.size() < 2) continue;
      std::vector<double> ce;
      Eigen::MatrixXd samples(lm.model.dim(), static_cast<Eigen::Index>(members.size()));
      for (std::size_t m = 0; m < members.size(); ++m) {
        samples.col(static_cast<Eigen::Index>(m)) = scored.x.col(static_cast<Eigen::Index>(members[m]));
        ce.push_back(scored.ce(static_cast<Eigen::Index>(members[m])));
      }
      const auto sel = halluc::select_scored(std::move(samples), std::move(ce), &lm.relation, lm.steps);
      const auto task = tasks::parse_task(std::get<1>(key));
      deltas[std::get<2>(key)][static_cast<std::size_t>(task)].push_back(*sel.delta);
    }
  }

  // Sample-and-select for the diffusion model.
  for (std::size_t k = 0; k < task_list.size(); ++k) {
    const auto dm = dm_mitigation(lm, wf, range, task_list[k], k, config);
    for (const auto& m : dm.results) deltas["dm"][static_cast<std::size_t>(task_list[k])].push_back(*m.delta);
    log << "task " << tasks::task_name(task_list[k]) << ": mitigated " << dm.results.size() << " prompts\n";
  }

  // table1.csv: relational error per model and task.
  std::map<std::string, std::map<std::string, std::vector<double>>> er_by;
  std::vector<std::string> model_order;
  for (const auto& r : rows) {
    if (!er_by.contains(r.model)) model_order.push_back(r.model);
    er_by[r.model][r.task].push_back(r.er);
  }
  for (const auto& model : model_order) {
    for (const auto& [task, er] : er_by[model]) {
      ModelTaskStats s{er.size(), mean_of(er), population_std(er), std::numeric_limits<double>::quiet_NaN()};
      const auto& base = er_by["baseline"][task];
      const double bm = mean_of(base);
      if (!base.empty() && bm > 0.0) s.ratio_to_baseline = s.er_mean / bm;
      result.table1[model][task] = s;
    }
  }
  {
    const fs::path path = dir / "table1.csv";
    auto out = open_csv(path, hash, "model,task,n,er_mean,er_std,ratio_to_baseline");
    for (const auto& model : model_order) {
      for (const auto& [task, s] : result.table1[model]) {
        out << data::escape_csv(model) << ',' << task << ',' << s.n << ',' << format_number(s.er_mean) << ','
            << format_number(s.er_std) << ',' << format_number(s.ratio_to_baseline) << '\n';
      }
    }
    finish(out, path);
    result.files.push_back(path);
  }

  // table2.csv: detection overlap pooled over tasks, selection gain per task.
  {
    const fs::path path = dir / "table2.csv";
    auto out = open_csv(path, hash, "model,overlap,n_low,n_medium,n_high,delta_oc,delta_uc,delta_fc");
    for (const auto& model : model_order) {
      if (model == "baseline") continue;
      std::vector<double> low, high;
      ModelDetection d;
      for (const auto& r : rows) {
        if (r.model != model) continue;
        switch (halluc::classify(r.ce, result.quartiles)) {
          case halluc::HallucinationLevel::kLow: low.push_back(r.er); ++d.low; break;
          case halluc::HallucinationLevel::kMedium: ++d.medium; break;
          case halluc::HallucinationLevel::kHigh: high.push_back(r.er); ++d.high; break;
        }
      }
      d.overlap = (low.empty() || high.empty()) ? std::numeric_limits<double>::quiet_NaN()
                                                : metrics::overlap_coefficient(low, high, config.overlap_bins);
      for (std::size_t t = 0; t < 3; ++t) {
        const auto& v = deltas[model][t];
        d.delta[t] = mean_of(v);
        d.delta_n[t] = v.size();
      }
      out << data::escape_csv(model) << ',' << format_number(d.overlap) << ',' << d.low << ',' << d.medium << ','
          << d.high;
      for (double v : d.delta) out << ',' << format_number(v);
      out << '\n';
      result.table2[model] = d;
    }
    finish(out, path);
    result.files.push_back(path);
  }

  // Per-pair metrics for metric-vs-error scatter plots.
  {
    const fs::path path = dir / "scatter.csv";
    auto out = open_csv(path, hash, "model,task,window_id,er,ce,level,pe,tv,rts,pts,cts");
    for (const auto& r : rows) {
      out << data::escape_csv(r.model) << ',' << r.task << ',' << data::escape_csv(r.window) << ','
          << format_number(r.er) << ',' << format_number(r.ce) << ','
          << halluc::level_name(halluc::classify(r.ce, result.quartiles)) << ',' << number_or_empty(r.pe) << ','
          << number_or_empty(r.tv) << ',' << number_or_empty(r.rts) << ',' << number_or_empty(r.pts) << ','
          << number_or_empty(r.cts) << '\n';
    }
    finish(out, path);
    result.files.push_back(path);
  }
  return result;
}

Eigen::MatrixXd heatmap_grid(const diffusion::DiffusionModel& model, int nx, int ny, double lo, double hi,
                             std::uint64_t seed, int draws) {
  if (model.dim() != 2) {
    throw ConfigError("heatmap needs a two-dimensional model, checkpoint has dimension " + std::to_string(model.dim()));
  }
  if (nx < 2 || ny < 2 || !(hi > lo)) throw ConfigError("heatmap grid needs nx, ny >= 2 and max > min");
  Eigen::MatrixXd points(2, static_cast<Eigen::Index>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Eigen::Index c = static_cast<Eigen::Index>(iy) * nx + ix;
      points(0, c) = lo + (hi - lo) * ix / (nx - 1);
      points(1, c) = lo + (hi - lo) * iy / (ny - 1);
    }
  }
  diffusion::Rng rng(seed);
  const Eigen::VectorXd ce = metrics::combined_error_batch(model, points, rng, draws);
  Eigen::MatrixXd grid(ny, nx);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) grid(iy, ix) = ce(static_cast<Eigen::Index>(iy) * nx + ix);
  return grid;
}

void write_pgm(std::ostream& out, const Eigen::MatrixXd& grid) {
  const double lo = grid.minCoeff();
  const double hi = grid.maxCoeff();
  out << "P2\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
  for (Eigen::Index r = grid.rows() - 1; r >= 0; --r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      const int v = hi > lo ? static_cast<int>(std::lround(255.0 * (grid(r, c) - lo) / (hi - lo))) : 128;
      out << v << (c + 1 < grid.cols() ? ' ' : '\n');
    }
  }
}

fs::path cmd_heatmap(const RunConfig& config, std::ostream& log) {
  const auto lm = load_model(config.checkpoint_path());
  const auto grid = heatmap_grid(lm.model, config.grid_nx, config.grid_ny, config.grid_min, config.grid_max,
                                 stream_seed(config, kHeatmapStream), config.ce_draws);
  const fs::path dir = ensure_output(config);
  const fs::path path = dir / "heatmap.csv";
  auto out = open_csv(path, config.hash(), "ix,iy,x0,x1,ce");
  for (int iy = 0; iy < config.grid_ny; ++iy) {
    for (int ix = 0; ix < config.grid_nx; ++ix) {
      const double x0 = config.grid_min + (config.grid_max - config.grid_min) * ix / (config.grid_nx - 1);
      const double x1 = config.grid_min + (config.grid_max - config.grid_min) * iy / (config.grid_ny - 1);
      out << ix << ',' << iy << ',' << format_number(x0) << ',' << format_number(x1) << ','
          << format_number(grid(iy, ix)) << '\n';
    }
  }
  finish(out, path);
  const fs::path image = dir / "heatmap.pgm";
  std::ofstream img(image, std::ios::binary | std::ios::trunc);
  if (!img) throw DataError("cannot open " + image.string() + " for writing");
  write_pgm(img, grid);
  finish(img, image);
  log << "wrote " << grid.size() << " cells to " << path.string() << " and " << image.string() << '\n';
  return path;
}

}  // namespace relhal::app
