// SPDX-License-Identifier: Apache-2.0

#include "relhal/data/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "relhal/data/csv.hpp"
#include "relhal/error.hpp"

namespace relhal::data {

std::pair<std::string, std::string> default_source_columns(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kWTH: return {"T (degC)", "rh (%)"};
    case DatasetKind::kETT: return {"MUFL", "OT"};
    default: return {"", ""};
  }
}

RawSeries load_raw_series(const std::filesystem::path& csv, const std::string& column0,
                          const std::string& column1) {
  const auto table = read_csv_file(csv.string());
  if (table.header.size() < 3) {
    throw DataError(csv.string() + ": need a timestamp column and at least two value columns");
  }
  auto resolve = [&](const std::string& name, std::size_t fallback) {
    if (name.empty()) return fallback;
    const auto k = table.column(name);
    if (k == CsvTable::npos) throw DataError(csv.string() + ": no column named '" + name + "'");
    return k;
  };
  const std::size_t c0 = resolve(column0, 1);
  const std::size_t c1 = resolve(column1, 2);
  RawSeries raw;
  raw.timestamps.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    raw.timestamps.push_back(row[0]);
    raw.x0.push_back(parse_number(row[c0], csv.string(), table.lines[r]));
    raw.x1.push_back(parse_number(row[c1], csv.string(), table.lines[r]));
  }
  return raw;
}

RelationalDataset build_relational(const RawSeries& raw, DatasetKind kind,
                                   const BuildOptions& options) {
  if (kind == DatasetKind::kSynthetic2d) {
    throw ConfigError("synthetic2d is generated, not built from source series");
  }
  if (raw.x0.size() != raw.x1.size() ||
      (!raw.timestamps.empty() && raw.timestamps.size() != raw.x0.size())) {
    throw DataError("source series are misaligned (" + std::to_string(raw.x0.size()) + " vs " +
                    std::to_string(raw.x1.size()) + " rows)");
  }
  if (options.window < 1 || options.stride < 1) throw ConfigError("window and stride must be >= 1");

  const Relation relation(kind);
  const std::size_t n = raw.x0.size();
  RelationalDataset ds;
  ds.kind = kind;
  ds.variables = 3;
  ds.steps = options.window;
  ds.report.rows = n;

  std::vector<double> x0(n), x1(n), x2(n);
  std::vector<char> valid(n, 1);
  for (std::size_t r = 0; r < n; ++r) {
    x0[r] = raw.x0[r] * options.x0_scale;
    x1[r] = raw.x1[r] * options.x1_scale;
    if (!std::isfinite(x0[r]) || !std::isfinite(x1[r])) {
      valid[r] = 0;
      ++ds.report.dropped_rows;
      continue;
    }
    if (kind == DatasetKind::kWTH && (x1[r] < 0.0 || x1[r] > 1.0)) ++ds.report.humidity_excursions;
    x2[r] = relation.derive(x0[r], x1[r]);
  }

  const auto L = static_cast<std::size_t>(options.window);
  const auto stride = static_cast<std::size_t>(options.stride);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + L <= n; s += stride) {
    bool ok = true;
    for (std::size_t k = s; k < s + L; ++k) ok = ok && valid[k];
    if (ok) {
      starts.push_back(s);
    } else {
      ++ds.report.discarded_windows;
    }
  }

  ds.windows.resize(ds.dim(), static_cast<Eigen::Index>(starts.size()));
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const auto col = static_cast<Eigen::Index>(w);
    for (std::size_t tau = 0; tau < L; ++tau) {
      const std::size_t r = starts[w] + tau;
      const auto t = static_cast<Eigen::Index>(tau);
      ds.windows(t, col) = x0[r];
      ds.windows(ds.steps + t, col) = x1[r];
      ds.windows(2 * ds.steps + t, col) = x2[r];
    }
    ds.starts.push_back(raw.timestamps.empty() ? std::to_string(starts[w]) : raw.timestamps[starts[w]]);
    ds.start_rows.push_back(static_cast<Eigen::Index>(starts[w]));
  }
  return ds;
}

SplitSpec split_chrono(Eigen::Index windows) {
  if (windows < 7) {
    throw ConfigError("chronological 5:1:1 split needs at least 7 windows, got " +
                      std::to_string(windows));
  }
  const Eigen::Index small = windows / 7;
  const Eigen::Index train = windows - 2 * small;
  return SplitSpec{{0, train}, {train, train + small}, {train + small, windows}};
}

RelationalDataset make_synthetic2d(Eigen::Index points, double noise_std, std::uint64_t seed) {
  if (points < 1) throw ConfigError("synthetic2d needs at least one point");
  if (!(noise_std >= 0.0)) throw ConfigError("noise std must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Relation relation(DatasetKind::kSynthetic2d);
  RelationalDataset ds;
  ds.kind = DatasetKind::kSynthetic2d;
  ds.variables = 2;
  ds.steps = 1;
  ds.windows.resize(2, points);
  for (Eigen::Index k = 0; k < points; ++k) {
    const double x = uniform(rng);
    const double eta = normal(rng) * noise_std;
    ds.windows(0, k) = x;
    ds.windows(1, k) = relation.derive(x, 0.0) + eta;
    ds.starts.push_back(std::to_string(k));
    ds.start_rows.push_back(k);
  }
  ds.report.rows = static_cast<std::size_t>(points);
  return ds;
}

std::filesystem::path metadata_path(const std::filesystem::path& windows_csv) {
  auto p = windows_csv;
  p.replace_extension(".meta.json");
  return p;
}

void write_windows(const std::filesystem::path& path, const RelationalDataset& ds,
                   const SplitSpec& split, const std::string& config_hash,
                   const std::string& extra_meta_json) {
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "# relhal-windows dataset=" << dataset_name(ds.kind) << " config_hash=" << config_hash
        << '\n';
    out << "window_id,start";
    for (Eigen::Index i = 0; i < ds.dim(); ++i) out << ",x" << i;
    out << '\n';
    for (Eigen::Index w = 0; w < ds.count(); ++w) {
      out << w << ',' << escape_csv(ds.starts[static_cast<std::size_t>(w)]);
      for (Eigen::Index i = 0; i < ds.dim(); ++i) out << ',' << format_number(ds.windows(i, w));
      out << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
  }
  nlohmann::json meta = nlohmann::json::parse(extra_meta_json);
  meta["dataset"] = dataset_name(ds.kind);
  meta["variables"] = ds.variables;
  meta["steps"] = ds.steps;
  meta["count"] = ds.count();
  meta["config_hash"] = config_hash;
  meta["split"] = {{"train", {split.train.begin, split.train.end}},
                   {"validation", {split.validation.begin, split.validation.end}},
                   {"test", {split.test.begin, split.test.end}}};
  meta["report"] = {{"rows", ds.report.rows},
                    {"dropped_rows", ds.report.dropped_rows},
                    {"discarded_windows", ds.report.discarded_windows},
                    {"humidity_excursions", ds.report.humidity_excursions}};
  std::ofstream out(metadata_path(path), std::ios::trunc);
  if (!out) throw DataError("cannot open " + metadata_path(path).string() + " for writing");
  out << meta.dump(2) << '\n';
}

WindowsFile read_windows(const std::filesystem::path& path) {
  const auto meta_file = metadata_path(path);
  std::ifstream meta_in(meta_file);
  if (!meta_in) throw DataError("missing windows metadata " + meta_file.string());
  WindowsFile file;
  auto& ds = file.dataset;
  try {
    const auto meta = nlohmann::json::parse(meta_in);
    ds.kind = parse_dataset_kind(meta.at("dataset").get<std::string>());
    ds.variables = meta.at("variables").get<int>();
    ds.steps = meta.at("steps").get<Eigen::Index>();
    const auto& split = meta.at("split");
    auto range = [&](const char* key) {
      return IndexRange{split.at(key).at(0).get<Eigen::Index>(), split.at(key).at(1).get<Eigen::Index>()};
    };
    file.split = SplitSpec{range("train"), range("validation"), range("test")};
    file.config_hash = meta.value("config_hash", "");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(meta_file.string() + ": malformed metadata: " + e.what());
  }

  const auto table = read_csv_file(path.string());
  const Eigen::Index dim = ds.dim();
  if (static_cast<Eigen::Index>(table.header.size()) != dim + 2) {
    throw DataError(path.string() + ": expected " + std::to_string(dim + 2) + " columns");
  }
  ds.windows.resize(dim, static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ds.starts.push_back(row[1]);
    ds.start_rows.push_back(static_cast<Eigen::Index>(r));
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double v = parse_number(row[static_cast<std::size_t>(i + 2)], path.string(), table.lines[r]);
      if (!std::isfinite(v)) throw ParseError(path.string(), table.lines[r], "non-finite window value");
      ds.windows(i, static_cast<Eigen::Index>(r)) = v;
    }
  }
  if (file.split.test.end != ds.count()) {
    throw DataError(path.string() + ": split metadata does not cover " + std::to_string(ds.count()) +
                    " windows");
  }
  return file;
}

}  // namespace relhal::data
