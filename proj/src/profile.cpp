#include "catenc/profile.hpp"

#include <algorithm>
#include <cmath>

#include "catenc/error.hpp"

namespace catenc {

double normalized_entropy(const Column& column) {
  if (!column.is_categorical()) throw InvalidArgument("normalized entropy of numeric column " + column.name);
  const auto counts = column.level_counts();
  double total = 0.0;
  std::size_t n_levels = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    total += static_cast<double>(c);
    ++n_levels;
  }
  if (n_levels == 0) throw InvalidArgument("column " + column.name + " has no observed levels");
  if (n_levels == 1) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  const double ne = h / std::log(static_cast<double>(n_levels));
  return std::clamp(ne, 0.0, 1.0);
}

DatasetProfile profile_dataset(const DataTable& table) {
  DatasetProfile p;
  p.n_rows = table.n_rows();
  p.task = table.task();
  for (auto j : table.feature_indices()) {
    const auto& c = table.column(j);
    if (!c.is_categorical()) continue;
    ColumnProfile cp;
    cp.name = c.name;
    cp.n_levels = c.observed_level_count();
    cp.normalized_entropy = cp.n_levels > 0 ? normalized_entropy(c) : 0.0;
    cp.missing_rate = table.n_rows() ? static_cast<double>(c.missing_count()) / static_cast<double>(table.n_rows()) : 0.0;
    p.categorical.push_back(cp);
  }
  return p;
}

}  // namespace catenc
