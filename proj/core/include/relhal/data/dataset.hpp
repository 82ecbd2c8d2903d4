// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relhal/data/relation.hpp"

namespace relhal::data {

// Two aligned source series (plus timestamps) taken from a raw CSV.
struct RawSeries {
  std::vector<std::string> timestamps;
  std::vector<double> x0;
  std::vector<double> x1;
};

// Loads two value columns of a CSV whose first column is a timestamp. Empty
// `column` names select the first/second value column respectively.
RawSeries load_raw_series(const std::filesystem::path& csv, const std::string& column0 = {},
                          const std::string& column1 = {});

// Documented default source columns for a dataset ("" = positional).
std::pair<std::string, std::string> default_source_columns(DatasetKind kind);

struct BuildOptions {
  Eigen::Index window = 24;
  Eigen::Index stride = 24;
  double x0_scale = 1.0;
  double x1_scale = 1.0;  // e.g. 0.01 to turn relative humidity in % into a fraction
};

struct BuildReport {
  std::size_t rows = 0;
  std::size_t dropped_rows = 0;        // rows with a missing value
  std::size_t discarded_windows = 0;   // windows overlapping a dropped row
  std::size_t humidity_excursions = 0; // rWTH rows with humidity outside [0, 1]
};

struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Contiguous chronological split of the window sequence.
struct SplitSpec {
  IndexRange train;
  IndexRange validation;
  IndexRange test;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct RelationalDataset {
  DatasetKind kind = DatasetKind::kSynthetic2d;
  int variables = 3;
  Eigen::Index steps = 24;
  Eigen::MatrixXd windows;           // dim x count, i = v * steps + tau
  std::vector<std::string> starts;   // timestamp of each window's first step
  std::vector<Eigen::Index> start_rows;
  BuildReport report;

  Relation relation() const { return Relation(kind); }
  Eigen::Index dim() const { return variables * steps; }
  Eigen::Index count() const { return windows.cols(); }
  Eigen::MatrixXd slice(IndexRange range) const { return windows.middleCols(range.begin, range.size()); }
};

// Derives the third variable per dataset kind and cuts windows on a fixed
// grid of `stride` rows. Rows with NaN are dropped and windows touching them
// discarded. Throws DataError for misaligned inputs.
RelationalDataset build_relational(const RawSeries& raw, DatasetKind kind,
                                   const BuildOptions& options = {});

// 5:1:1 by window count; validation and test get floor(n / 7) each and the
// remainder goes to train. Needs at least 7 windows.
SplitSpec split_chrono(Eigen::Index windows);

// Points (x, sin(2 pi x) + eta), x ~ U[-1, 1], eta ~ N(0, noise_std^2).
RelationalDataset make_synthetic2d(Eigen::Index points, double noise_std, std::uint64_t seed);

// Canonical windows file plus its metadata sidecar.
struct WindowsFile {
  RelationalDataset dataset;
  SplitSpec split;
  std::string config_hash;
};

std::filesystem::path metadata_path(const std::filesystem::path& windows_csv);

// Writes `<path>` (CSV: window_id, start, x0..x{dim-1}) and
// `<stem>.meta.json`. `extra_meta` is merged into the JSON verbatim.
void write_windows(const std::filesystem::path& path, const RelationalDataset& dataset,
                   const SplitSpec& split, const std::string& config_hash,
                   const std::string& extra_meta_json = "{}");
WindowsFile read_windows(const std::filesystem::path& path);

}  // namespace relhal::data
