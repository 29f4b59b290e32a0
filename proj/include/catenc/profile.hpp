#pragma once

#include <string>
#include <vector>

#include "catenc/table.hpp"

namespace catenc {

/// Shannon entropy of the level frequencies divided by log(L), L the number
/// of observed levels. Missing cells are excluded; L == 1 gives 0.
double normalized_entropy(const Column& column);

struct ColumnProfile {
  std::string name;
  std::size_t n_levels = 0;
  double normalized_entropy = 0.0;
  double missing_rate = 0.0;
};

struct DatasetProfile {
  std::size_t n_rows = 0;
  Task task;
  std::vector<ColumnProfile> categorical;  // target excluded
};

DatasetProfile profile_dataset(const DataTable& table);

}  // namespace catenc
