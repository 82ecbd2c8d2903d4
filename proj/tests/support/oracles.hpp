// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used to check the library. They
// favour obviousness over speed and share no code with core/.

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace relhal::testing {

// k-th smallest value (0-based) found by rank counting, O(n^2).
double order_statistic(const std::vector<double>& values, std::size_t k);

// Linear-interpolation quantile built on order_statistic.
double quantile_oracle(const std::vector<double>& values, double p);

// Bins every value by scanning the edge list, then sums the bin minima.
double overlap_oracle(const std::vector<double>& low, const std::vector<double>& high, int bins);

// First index whose value is <= every other value.
std::size_t argmin_oracle(const std::vector<double>& values);

// 0 low, 1 medium, 2 high.
int level_oracle(double ce, double q2, double q3);

// Scalar noise predictor eps(z_i, t) used by both the stub model and the oracle.
using ScalarNoise = std::function<double(double z, std::size_t index, int t)>;

// CE of one vector computed element by element: standardize, corrupt to
// t = 1 with `eps`, apply the posterior mean with `predict`, RMSE against the
// standardized input.
double combined_error_oracle(const std::vector<double>& x, const std::vector<double>& means,
                             const std::vector<double>& stds, std::size_t steps, double beta1,
                             const std::vector<double>& eps, const ScalarNoise& predict);

// Relation residuals written out by hand per dataset name.
double relational_error_oracle(const std::string& dataset, const std::vector<double>& window, std::size_t steps);

}  // namespace relhal::testing
