// SPDX-License-Identifier: Apache-2.0

#include "relhal/data/relation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "relhal/error.hpp"

namespace relhal::data {

std::string_view dataset_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kECL: return "rECL";
    case DatasetKind::kWTH: return "rWTH";
    case DatasetKind::kTraffic: return "rTraffic";
    case DatasetKind::kIllness: return "rIllness";
    case DatasetKind::kETT: return "rETT";
    case DatasetKind::kSynthetic2d: return "synthetic2d";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "synthetic2d" || s == "synthetic") return DatasetKind::kSynthetic2d;
  if (!s.empty() && s.front() == 'r') s.erase(0, 1);
  if (s == "ecl") return DatasetKind::kECL;
  if (s == "wth" || s == "weather") return DatasetKind::kWTH;
  if (s == "traffic") return DatasetKind::kTraffic;
  if (s == "illness") return DatasetKind::kIllness;
  if (s == "ett" || s == "etth1") return DatasetKind::kETT;
  throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

double relation_vpd(double temperature_c, double humidity) {
  return 0.6108 * std::exp(17.27 * temperature_c / (temperature_c + 237.3)) * (1.0 - humidity);
}

double Relation::derive(double x0, double x1) const {
  switch (kind_) {
    case DatasetKind::kECL:
    case DatasetKind::kIllness: return x0 - x1;
    case DatasetKind::kTraffic: return x0 + x1;
    case DatasetKind::kETT: return x0 * x1;
    case DatasetKind::kWTH: return relation_vpd(x0, x1);
    case DatasetKind::kSynthetic2d: return std::sin(2.0 * std::numbers::pi * x0);
  }
  return 0.0;
}

double Relation::residual(double x0, double x1, double x2) const {
  if (kind_ == DatasetKind::kSynthetic2d) return x1 - derive(x0, 0.0);
  return derive(x0, x1) - x2;
}

double relational_error(const Eigen::Ref<const Eigen::VectorXd>& window, const Relation& relation,
                        Eigen::Index steps) {
  if (steps < 1 || window.size() != relation.variables() * steps) {
    throw ShapeError("window of size " + std::to_string(window.size()) +
                     " does not match relation layout (" + std::to_string(relation.variables()) +
                     " x " + std::to_string(steps) + ")");
  }
  double total = 0.0;
  for (Eigen::Index tau = 0; tau < steps; ++tau) {
    const double x0 = window(tau);
    const double x1 = window(steps + tau);
    const double x2 = relation.variables() == 3 ? window(2 * steps + tau) : 0.0;
    total += std::abs(relation.residual(x0, x1, x2));
  }
  return total / static_cast<double>(steps);
}

}  // namespace relhal::data
