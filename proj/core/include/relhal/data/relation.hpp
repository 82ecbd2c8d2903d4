// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace relhal::data {

enum class DatasetKind { kECL, kWTH, kTraffic, kIllness, kETT, kSynthetic2d };

// Canonical names: rECL, rWTH, rTraffic, rIllness, rETT, synthetic2d.
std::string_view dataset_name(DatasetKind kind);
// Case-insensitive; also accepts names without the leading 'r'.
DatasetKind parse_dataset_kind(std::string_view name);

// Vapour pressure deficit in kPa for temperature in Celsius and relative
// humidity as a fraction.
double relation_vpd(double temperature_c, double humidity);

// Ground-truth relation f(x0, x1, x2) = 0 linking the variables of one
// time-step. For the 2-D synthetic set only x0 and x1 are used.
class Relation {
 public:
  explicit Relation(DatasetKind kind) : kind_(kind) {}

  DatasetKind kind() const { return kind_; }
  int variables() const { return kind_ == DatasetKind::kSynthetic2d ? 2 : 3; }

  // Value of the dependent variable implied by the others (x2 from x0, x1;
  // for synthetic2d the curve height at x0).
  double derive(double x0, double x1) const;

  double residual(double x0, double x1, double x2 = 0.0) const;

 private:
  DatasetKind kind_;
};

// Mean over time-steps of |f| for one window laid out as i = v * steps + tau.
double relational_error(const Eigen::Ref<const Eigen::VectorXd>& window, const Relation& relation,
                        Eigen::Index steps);

}  // namespace relhal::data
