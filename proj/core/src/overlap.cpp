// SPDX-License-Identifier: Apache-2.0

#include "relhal/metrics/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relhal/error.hpp"

namespace relhal::metrics {

std::vector<double> shared_edges(std::span<const double> a, std::span<const double> b, int bins) {
  if (a.empty() || b.empty()) throw ConfigError("overlap needs two non-empty samples");
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("overlap samples must be finite");
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  edges.back() = hi;
  return edges;
}

Histogram histogram(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw ConfigError("histogram needs at least two edges");
  if (values.empty()) throw ConfigError("histogram of an empty sample");
  const std::size_t bins = edges.size() - 1;
  Histogram h{std::vector<double>(edges.begin(), edges.end()), std::vector<double>(bins, 0.0)};
  std::size_t counted = 0;
  for (double v : values) {
    if (v < edges.front() || v > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto bin = static_cast<std::size_t>(std::distance(edges.begin(), it)) - 1;
    bin = std::min(bin, bins - 1);
    h.probabilities[bin] += 1.0;
    ++counted;
  }
  if (counted == 0) throw ConfigError("no histogram value falls inside the bin edges");
  for (double& p : h.probabilities) p /= static_cast<double>(counted);
  return h;
}

double overlap(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("overlap of histograms with different bin counts");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += std::min(p[k], q[k]);
  return std::clamp(sum, 0.0, 1.0);
}

double overlap_coefficient(std::span<const double> low, std::span<const double> high, int bins) {
  const auto edges = shared_edges(low, high, bins);
  const auto pl = histogram(low, edges);
  const auto ph = histogram(high, edges);
  return overlap(pl.probabilities, ph.probabilities);
}

}  // namespace relhal::metrics
