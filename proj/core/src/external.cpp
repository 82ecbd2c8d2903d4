// SPDX-License-Identifier: Apache-2.0

#include "relhal/halluc/external.hpp"

#include <cmath>
#include <fstream>

#include "relhal/data/csv.hpp"
#include "relhal/error.hpp"

namespace relhal::halluc {

ExternalIngest ingest_external_responses(std::istream& in, Eigen::Index dim, const std::string& source) {
  const data::CsvTable table = data::read_csv(in, source);
  const std::size_t id_col = table.column("window_id");
  const std::size_t task_col = table.column("task");
  const std::size_t model_col = table.column("model");
  const std::size_t group_col = table.column("group");
  if (id_col == data::CsvTable::npos || task_col == data::CsvTable::npos || model_col == data::CsvTable::npos) {
    throw ParseError(source, 1, "header must contain window_id, task and model");
  }
  std::vector<std::size_t> value_cols(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::string name = "x" + std::to_string(i);
    value_cols[static_cast<std::size_t>(i)] = table.column(name);
    if (value_cols[static_cast<std::size_t>(i)] == data::CsvTable::npos) {
      throw ParseError(source, 1, "header is missing column " + name);
    }
  }
  const std::size_t expected = 3 + (group_col != data::CsvTable::npos ? 1 : 0) + static_cast<std::size_t>(dim);
  if (table.header.size() != expected) {
    throw ParseError(source, 1,
                     "expected " + std::to_string(expected) + " columns, found " + std::to_string(table.header.size()));
  }

  ExternalIngest result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.lines[r];
    ExternalResponse resp;
    resp.window_id = row[id_col];
    resp.task = row[task_col];
    resp.model = row[model_col];
    if (group_col != data::CsvTable::npos) resp.group = row[group_col];
    resp.line = line;
    resp.values.resize(dim);
    bool finite = true;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double v = data::parse_number(row[value_cols[static_cast<std::size_t>(i)]], source, line);
      finite = finite && std::isfinite(v);
      resp.values(i) = v;
    }
    if (!finite) {
      result.rejected.push_back({line, "missing or non-finite response value"});
      continue;
    }
    result.responses.push_back(std::move(resp));
  }
  return result;
}

ExternalIngest ingest_external_responses(const std::filesystem::path& path, Eigen::Index dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open response file " + path.string());
  return ingest_external_responses(in, dim, path.string());
}

std::map<SampleGroupKey, std::vector<std::size_t>> group_responses(const std::vector<ExternalResponse>& responses) {
  std::map<SampleGroupKey, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < responses.size(); ++k) {
    const auto& r = responses[k];
    groups[{r.window_id, r.task, r.model, r.group}].push_back(k);
  }
  return groups;
}

}  // namespace relhal::halluc
