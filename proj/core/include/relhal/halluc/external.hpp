// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

namespace relhal::halluc {

// One externally produced response in original units.
struct ExternalResponse {
  std::string window_id;
  std::string task;
  std::string model;
  std::string group;  // empty when the file has no group column
  Eigen::VectorXd values;
  std::size_t line = 0;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct ExternalIngest {
  std::vector<ExternalResponse> responses;
  std::vector<RejectedRow> rejected;
};

// CSV with header window_id,task,model[,group],x0..x{dim-1}; '#' lines are
// comments. Column-count and header violations throw ParseError with the
// line number; rows with missing or non-finite values are rejected and listed.
ExternalIngest ingest_external_responses(std::istream& in, Eigen::Index dim,
                                         const std::string& source = "<stream>");
ExternalIngest ingest_external_responses(const std::filesystem::path& path, Eigen::Index dim);

using SampleGroupKey = std::tuple<std::string, std::string, std::string, std::string>;  // window, task, model, group

// Indices into `responses` per (window, task, model, group), in file order.
std::map<SampleGroupKey, std::vector<std::size_t>> group_responses(
    const std::vector<ExternalResponse>& responses);

}  // namespace relhal::halluc
