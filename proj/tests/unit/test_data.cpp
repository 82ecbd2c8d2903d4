// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "relhal/data/csv.hpp"
#include "relhal/data/dataset.hpp"
#include "relhal/data/normalizer.hpp"
#include "relhal/data/relation.hpp"
#include "relhal/error.hpp"

namespace relhal::data {
namespace {

TEST(Relation, VapourPressureDeficit) {
  EXPECT_NEAR(relation_vpd(25.0, 0.5), 1.5839, 1e-4);
  EXPECT_EQ(relation_vpd(25.0, 1.0), 0.0);
}

TEST(Relation, DerivedVariablePerDataset) {
  EXPECT_EQ(Relation(DatasetKind::kECL).derive(5.0, 2.0), 3.0);
  EXPECT_EQ(Relation(DatasetKind::kIllness).derive(5.0, 2.0), 3.0);
  EXPECT_EQ(Relation(DatasetKind::kTraffic).derive(5.0, 2.0), 7.0);
  EXPECT_EQ(Relation(DatasetKind::kETT).derive(5.0, 2.0), 10.0);
  EXPECT_EQ(Relation(DatasetKind::kSynthetic2d).variables(), 2);
  EXPECT_EQ(Relation(DatasetKind::kWTH).variables(), 3);
}

TEST(Relation, NamesRoundTrip) {
  for (auto k : {DatasetKind::kECL, DatasetKind::kWTH, DatasetKind::kTraffic, DatasetKind::kIllness,
                 DatasetKind::kETT, DatasetKind::kSynthetic2d}) {
    EXPECT_EQ(parse_dataset_kind(dataset_name(k)), k);
  }
  EXPECT_EQ(parse_dataset_kind("rTraffic"), DatasetKind::kTraffic);
  EXPECT_THROW(parse_dataset_kind("moon"), ConfigError);
}

TEST(RelationalError, ConstructedAndHandValues) {
  const Relation traffic(DatasetKind::kTraffic);
  Eigen::VectorXd w(6);
  w << 1.0, 2.0, 3.0, 4.0, 4.0, 6.0;  // two steps: x0, x1, x2 blocks
  EXPECT_EQ(relational_error(w, traffic, 2), 0.0);
  Eigen::VectorXd one(3);
  one << 1.0, 2.0, 7.0;
  EXPECT_EQ(relational_error(one, traffic, 1), 4.0);
  EXPECT_EQ(relational_error(Eigen::VectorXd::Zero(72), Relation(DatasetKind::kETT), 24), 0.0);
}

TEST(RelationalError, MatchesOracleAndIsPermutationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto name : {"ecl", "wth", "traffic", "illness", "ett"}) {
    const Relation rel(parse_dataset_kind(name));
    Eigen::VectorXd w(72);
    for (auto& v : w) v = u(rng);
    if (std::string(name) == "wth") w.segment(24, 24) = w.segment(24, 24).cwiseAbs() / 2.0;
    const std::vector<double> copy(w.data(), w.data() + 72);
    EXPECT_NEAR(relational_error(w, rel, 24), testing::relational_error_oracle(name, copy, 24), 1e-12) << name;
    Eigen::VectorXd shuffled = w;
    for (int v = 0; v < 3; ++v) std::swap(shuffled(v * 24 + 3), shuffled(v * 24 + 17));
    EXPECT_NEAR(relational_error(shuffled, rel, 24), relational_error(w, rel, 24), 1e-14) << name;
  }
}

TEST(Csv, QuotedFieldsAndNumbers) {
  const auto fields = split_csv_line(R"(a,"b,c","say ""hi""",)");
  ASSERT_EQ(fields.size(), 4u);
  EXPECT_EQ(fields[1], "b,c");
  EXPECT_EQ(fields[2], "say \"hi\"");
  EXPECT_EQ(fields[3], "");
  EXPECT_TRUE(std::isnan(parse_number("", "x", 1)));
  EXPECT_TRUE(std::isnan(parse_number("NA", "x", 1)));
  EXPECT_EQ(parse_number("-1.5e2", "x", 1), -150.0);
  EXPECT_THROW(parse_number("abc", "x", 3), ParseError);
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(escape_csv("a,b"), "\"a,b\"");
}

TEST(Csv, ColumnMismatchNamesLine) {
  std::istringstream in("# comment\nt,a,b\n1,2,3\n4,5\n");
  try {
    read_csv(in, "toy.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("toy.csv:4"), std::string::npos) << e.what();
  }
}

RawSeries ramp(std::size_t n) {
  RawSeries raw;
  for (std::size_t r = 0; r < n; ++r) {
    raw.timestamps.push_back("t" + std::to_string(r));
    raw.x0.push_back(static_cast<double>(r));
    raw.x1.push_back(0.5 * static_cast<double>(r));
  }
  return raw;
}

TEST(Build, TrafficWindowsFromToySeries) {
  const auto ds = build_relational(ramp(48), DatasetKind::kTraffic);
  ASSERT_EQ(ds.count(), 2);
  EXPECT_EQ(ds.dim(), 72);
  for (Eigen::Index w = 0; w < 2; ++w) {
    for (Eigen::Index t = 0; t < 24; ++t) {
      EXPECT_EQ(ds.windows(48 + t, w), ds.windows(t, w) + ds.windows(24 + t, w));
    }
    EXPECT_EQ(relational_error(ds.windows.col(w), ds.relation(), 24), 0.0);
  }
  EXPECT_EQ(ds.starts[1], "t24");
}

TEST(Build, MissingRowsDiscardWindows) {
  auto raw = ramp(72);
  raw.x1[30] = std::nan("");
  const auto ds = build_relational(raw, DatasetKind::kECL);
  EXPECT_EQ(ds.count(), 2);
  EXPECT_EQ(ds.report.dropped_rows, 1u);
  EXPECT_EQ(ds.report.discarded_windows, 1u);
  EXPECT_EQ(ds.start_rows, (std::vector<Eigen::Index>{0, 48}));
}

TEST(Build, MisalignedSeriesThrow) {
  auto raw = ramp(48);
  raw.x1.pop_back();
  EXPECT_THROW(build_relational(raw, DatasetKind::kECL), DataError);
}

TEST(Build, ConstructedWindowsHaveZeroError) {
  testing::TempDir dir("wth");
  testing::write_weather_csv(dir / "w.csv", 24 * 30, 1);
  const auto raw = load_raw_series(dir / "w.csv", "T (degC)", "rh (%)");
  BuildOptions opt;
  opt.x1_scale = 0.01;
  const auto ds = build_relational(raw, DatasetKind::kWTH, opt);
  EXPECT_EQ(ds.count(), 30);
  for (Eigen::Index w = 0; w < ds.count(); ++w) EXPECT_LT(relational_error(ds.windows.col(w), ds.relation(), 24), 1e-12);
  EXPECT_EQ(ds.report.humidity_excursions, 0u);
}

TEST(Build, MissingSourceFileNamesPath) {
  try {
    load_raw_series("/nonexistent/source.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/source.csv"), std::string::npos);
  }
}

TEST(Split, ChronologicalFiveOneOne) {
  const auto ten = split_chrono(10);
  EXPECT_EQ(ten.train, (IndexRange{0, 8}));
  EXPECT_EQ(ten.validation, (IndexRange{8, 9}));
  EXPECT_EQ(ten.test, (IndexRange{9, 10}));
  const auto big = split_chrono(700);
  EXPECT_EQ(big.train.size(), 500);
  EXPECT_EQ(big.validation.size(), 100);
  EXPECT_EQ(big.test.size(), 100);
  EXPECT_THROW(split_chrono(6), ConfigError);
}

TEST(Synthetic, PointsLieOnCurve) {
  const auto ds = make_synthetic2d(200, 0.0, 4);
  EXPECT_EQ(ds.dim(), 2);
  for (Eigen::Index j = 0; j < ds.count(); ++j) {
    EXPECT_GE(ds.windows(0, j), -1.0);
    EXPECT_LE(ds.windows(0, j), 1.0);
    EXPECT_NEAR(ds.windows(1, j), std::sin(2.0 * 3.14159265358979323846 * ds.windows(0, j)), 1e-15);
  }
  EXPECT_EQ(make_synthetic2d(50, 0.1, 9).windows, make_synthetic2d(50, 0.1, 9).windows);
}

TEST(Windows, RoundTripIsExactAndDeterministic) {
  testing::TempDir dir("windows");
  const auto ds = build_relational(ramp(24 * 9), DatasetKind::kETT);
  const auto split = split_chrono(ds.count());
  write_windows(dir / "a.csv", ds, split, "abc123");
  write_windows(dir / "b.csv", ds, split, "abc123");
  EXPECT_EQ(testing::read_file(dir / "a.csv"), testing::read_file(dir / "b.csv"));
  EXPECT_TRUE(std::filesystem::exists(metadata_path(dir / "a.csv")));
  const auto back = read_windows(dir / "a.csv");
  EXPECT_EQ(back.dataset.windows, ds.windows);
  EXPECT_EQ(back.dataset.kind, DatasetKind::kETT);
  EXPECT_EQ(back.split, split);
  EXPECT_EQ(back.config_hash, "abc123");
  EXPECT_EQ(back.dataset.starts, ds.starts);
}

TEST(Normalizer, PopulationStatisticsAndInverse) {
  Eigen::MatrixXd w(4, 2);  // two variables, two steps
  w << 1.0, 3.0,
       2.0, 4.0,
       10.0, 10.0,
       20.0, 30.0;
  const auto n = Normalizer::fit(w, 2, 2);
  EXPECT_DOUBLE_EQ(n.mean_at(0), 2.5);
  EXPECT_DOUBLE_EQ(n.std_at(1), std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(n.mean_at(2), 17.5);
  const Eigen::MatrixXd z = n.normalize(w);
  EXPECT_NEAR(z.topRows(2).mean(), 0.0, 1e-15);
  EXPECT_TRUE(n.denormalize(z).isApprox(w, 1e-15));
  EXPECT_THROW(Normalizer({0.0}, {0.0}, 1), ConfigError);
}

}  // namespace
}  // namespace relhal::data
