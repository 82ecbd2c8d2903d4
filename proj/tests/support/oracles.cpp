// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace relhal::testing {

double order_statistic(const std::vector<double>& values, std::size_t k) {
  for (std::size_t a = 0; a < values.size(); ++a) {
    std::size_t below = 0;
    std::size_t equal = 0;
    for (double v : values) {
      if (v < values[a]) ++below;
      if (v == values[a]) ++equal;
    }
    if (below <= k && k < below + equal) return values[a];
  }
  throw std::logic_error("order statistic out of range");
}

double quantile_oracle(const std::vector<double>& values, double p) {
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const double lo_rank = std::floor(h);
  const double lo = order_statistic(values, static_cast<std::size_t>(lo_rank));
  if (h == lo_rank) return lo;
  const double hi = order_statistic(values, static_cast<std::size_t>(lo_rank) + 1);
  return lo + (h - lo_rank) * (hi - lo);
}

double overlap_oracle(const std::vector<double>& low, const std::vector<double>& high, int bins) {
  double lo = low.front();
  double hi = low.front();
  for (const auto* sample : {&low, &high}) {
    for (double v : *sample) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges;
  for (int k = 0; k <= bins; ++k) edges.push_back(k == bins ? hi : lo + (hi - lo) * k / bins);
  auto probabilities = [&](const std::vector<double>& sample) {
    std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
    for (double v : sample) {
      for (int k = 0; k < bins; ++k) {
        const bool last = k == bins - 1;
        if (v >= edges[k] && (v < edges[k + 1] || (last && v <= edges[k + 1]))) {
          count[static_cast<std::size_t>(k)] += 1.0;
          break;
        }
      }
    }
    for (double& c : count) c /= static_cast<double>(sample.size());
    return count;
  };
  const auto p = probabilities(low);
  const auto q = probabilities(high);
  double sum = 0.0;
  for (int k = 0; k < bins; ++k) sum += p[k] < q[k] ? p[k] : q[k];
  return sum;
}

std::size_t argmin_oracle(const std::vector<double>& values) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    bool smallest = true;
    for (double v : values) smallest = smallest && values[j] <= v;
    if (smallest) return j;
  }
  throw std::logic_error("no minimum");
}

int level_oracle(double ce, double q2, double q3) {
  if (ce < q2) return 0;
  if (ce <= q3) return 1;
  return 2;
}

double combined_error_oracle(const std::vector<double>& x, const std::vector<double>& means,
                             const std::vector<double>& stds, std::size_t steps, double beta1,
                             const std::vector<double>& eps, const ScalarNoise& predict) {
  const double alpha = 1.0 - beta1;  // at t = 1, alpha_bar equals alpha
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t v = i / steps;
    const double z = (x[i] - means[v]) / stds[v];
    const double xt = std::sqrt(alpha) * z + std::sqrt(1.0 - alpha) * eps[i];
    const double e = predict(xt, i, 1);
    const double mu = (xt - (1.0 - alpha) / std::sqrt(1.0 - alpha) * e) / std::sqrt(alpha);
    sq += (mu - z) * (mu - z);
  }
  return std::sqrt(sq / static_cast<double>(x.size()));
}

double relational_error_oracle(const std::string& dataset, const std::vector<double>& w, std::size_t steps) {
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double a = w[t];
    const double b = w[steps + t];
    double f = 0.0;
    if (dataset == "synthetic2d") {
      f = b - std::sin(2.0 * 3.14159265358979323846 * a);
    } else {
      const double c = w[2 * steps + t];
      if (dataset == "ecl" || dataset == "illness") f = a - b - c;
      else if (dataset == "traffic") f = a + b - c;
      else if (dataset == "ett") f = a * b - c;
      else if (dataset == "wth") f = 0.6108 * std::exp(17.27 * a / (a + 237.3)) * (1.0 - b) - c;
      else throw std::invalid_argument("unknown dataset " + dataset);
    }
    total += std::fabs(f);
  }
  return total / static_cast<double>(steps);
}

}  // namespace relhal::testing
