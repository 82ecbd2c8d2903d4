// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace relhal::metrics {

struct Histogram {
  std::vector<double> edges;          // n + 1 edges
  std::vector<double> probabilities;  // n bins, sums to 1
};

// n equal-width bins spanning the pooled min..max of both samples. A
// degenerate range yields a single-width bin around the common value.
std::vector<double> shared_edges(std::span<const double> a, std::span<const double> b, int bins);

// Normalized histogram on the given edges; the last bin is closed.
Histogram histogram(std::span<const double> values, std::span<const double> edges);

// Sum over bins of min(P_k, Q_k).
double overlap(std::span<const double> p, std::span<const double> q);

// Overlap coefficient between the distributions of two samples.
double overlap_coefficient(std::span<const double> low, std::span<const double> high, int bins = 50);

}  // namespace relhal::metrics
