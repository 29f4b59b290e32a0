#include "catenc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "catenc/error.hpp"

namespace catenc {
namespace {

std::size_t mode_level(const Column& c) {
  const auto counts = c.level_counts();
  // max_element returns the first maximum: ties go to first appearance.
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Column fill_categorical(const Column& c, const std::string& label) {
  if (c.missing_count() == 0) return c;
  Column out = c;
  auto code = out.find_level(label);
  if (code < 0) {
    code = static_cast<std::int32_t>(out.levels.size());
    out.levels.push_back(label);
  }
  for (std::size_t i = 0; i < out.codes.size(); ++i) {
    if (out.missing[i]) {
      out.codes[i] = code;
      out.missing[i] = 0;
    }
  }
  return out;
}

Column fill_numeric(const Column& c, double value) {
  if (c.missing_count() == 0) return c;
  Column out = c;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (out.missing[i]) {
      out.values[i] = value;
      out.missing[i] = 0;
    }
  }
  return out;
}

bool is_constant(const Column& c) {
  if (c.is_categorical()) return c.observed_level_count() <= 1;
  bool seen = false;
  double first = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (c.missing[i]) continue;
    if (!seen) {
      first = c.values[i];
      seen = true;
    } else if (c.values[i] != first) {
      return false;
    }
  }
  return true;
}

}  // namespace

DataTable with_features(const DataTable& table, std::vector<Column> features) {
  // A trailing target stays last; otherwise it keeps its original slot when
  // possible, so identity steps return an identical table.
  const bool last = table.target_index() + 1 == table.n_columns();
  const auto target_index = last ? features.size() : std::min(table.target_index(), features.size());
  std::vector<Column> cols;
  cols.reserve(features.size() + 1);
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (k == target_index) cols.push_back(table.target());
    cols.push_back(std::move(features[k]));
  }
  if (target_index == features.size()) cols.push_back(table.target());
  return DataTable(std::move(cols), target_index, table.task());
}

DataTable ImputationPlan::apply(const DataTable& table) const {
  std::vector<Column> cols = table.columns();
  for (auto j : table.feature_indices()) {
    auto& c = cols[j];
    auto it = entries_.find(c.name);
    if (it == entries_.end()) throw DataError("imputation plan has no entry for column " + c.name);
    const auto& e = it->second;
    if (c.is_categorical()) {
      if (e.rule == Rule::mean) throw DataError("column " + c.name + " changed kind since imputation fit");
      c = fill_categorical(c, e.label);
    } else {
      if (e.rule != Rule::mean) throw DataError("column " + c.name + " changed kind since imputation fit");
      c = fill_numeric(c, e.value);
    }
  }
  return DataTable(std::move(cols), table.target_index(), table.task());
}

std::pair<DataTable, ImputationPlan> impute_stage1(const DataTable& train) {
  ImputationPlan plan;
  for (auto j : train.feature_indices()) {
    const auto& c = train.column(j);
    if (c.missing_count() == c.size() && c.size() > 0)
      throw DataError("column '" + c.name + "' is entirely missing in training data");
    ImputationPlan::Entry e;
    if (c.is_categorical()) {
      if (c.find_level(kMissingLevel) >= 0)
        throw DataError("column '" + c.name + "' already contains the reserved level " + kMissingLevel);
      if (c.observed_level_count() > 2) {
        e.rule = ImputationPlan::Rule::new_level;
        e.label = kMissingLevel;
      } else {
        e.rule = ImputationPlan::Rule::mode;
        e.label = c.levels.empty() ? std::string(kMissingLevel) : c.levels[mode_level(c)];
      }
    } else {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < c.values.size(); ++i) {
        if (c.missing[i]) continue;
        sum += c.values[i];
        ++n;
      }
      e.rule = ImputationPlan::Rule::mean;
      e.value = n ? sum / static_cast<double>(n) : 0.0;
    }
    plan.entries_.emplace(c.name, e);
  }
  auto imputed = plan.apply(train);
  return {std::move(imputed), std::move(plan)};
}

DataTable impute_stage2(const DataTable& encoded, const UnseenFallbacks& fallbacks) {
  std::vector<Column> cols = encoded.columns();
  for (auto j : encoded.feature_indices()) {
    auto& c = cols[j];
    if (c.missing_count() == 0) continue;
    if (c.is_categorical()) throw DataError("categorical column '" + c.name + "' has missing cells after encoding");
    auto it = fallbacks.find(c.name);
    if (it == fallbacks.end()) throw DataError("no unseen-level fallback declared for column '" + c.name + "'");
    c = fill_numeric(c, it->second);
  }
  return DataTable(std::move(cols), encoded.target_index(), encoded.task());
}

DataTable DropPlan::apply(const DataTable& table) const {
  std::vector<Column> features;
  for (auto j : table.feature_indices()) {
    const auto& c = table.column(j);
    if (std::find(dropped_.begin(), dropped_.end(), c.name) == dropped_.end()) features.push_back(c);
  }
  return with_features(table, std::move(features));
}

std::pair<DataTable, DropPlan> drop_constant_columns(const DataTable& train) {
  DropPlan plan;
  const auto features = train.feature_indices();
  for (auto j : features)
    if (is_constant(train.column(j))) plan.dropped_.push_back(train.column(j).name);
  if (!features.empty() && plan.dropped_.size() == features.size())
    throw DataError("every feature column is constant in training data");
  auto out = plan.apply(train);
  return {std::move(out), std::move(plan)};
}

std::vector<Column> indicator_columns(const Column& column, const std::vector<std::string>& levels) {
  const auto n = column.size();
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t k = 0; k < levels.size(); ++k) slot.emplace(levels[k], k);
  // Map this column's dictionary onto indicator slots once.
  std::vector<std::ptrdiff_t> code_slot(column.levels.size(), -1);
  for (std::size_t l = 0; l < column.levels.size(); ++l) {
    auto it = slot.find(column.levels[l]);
    if (it != slot.end()) code_slot[l] = static_cast<std::ptrdiff_t>(it->second);
  }
  std::vector<std::vector<double>> data(levels.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (column.missing[i]) continue;
    const auto s = code_slot[static_cast<std::size_t>(column.codes[i])];
    if (s >= 0) data[static_cast<std::size_t>(s)][i] = 1.0;
  }
  std::vector<Column> out;
  out.reserve(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k)
    out.push_back(Column::numeric(column.name + "=" + levels[k], std::move(data[k])));
  return out;
}

DataTable OneHotPlan::apply(const DataTable& table) const {
  std::vector<Column> features;
  for (auto j : table.feature_indices()) {
    const auto& c = table.column(j);
    if (!c.is_categorical()) {
      features.push_back(c);
      continue;
    }
    auto it = levels_.find(c.name);
    if (it == levels_.end()) throw DataError("one-hot plan has no entry for categorical column '" + c.name + "'");
    for (auto& ind : indicator_columns(c, it->second)) features.push_back(std::move(ind));
  }
  return with_features(table, std::move(features));
}

std::pair<DataTable, OneHotPlan> final_one_hot(const DataTable& train) {
  OneHotPlan plan;
  for (auto j : train.feature_indices()) {
    const auto& c = train.column(j);
    if (!c.is_categorical()) continue;
    std::vector<std::string> observed;
    const auto counts = c.level_counts();
    for (std::size_t l = 0; l < c.levels.size(); ++l)
      if (counts[l] > 0) observed.push_back(c.levels[l]);
    plan.levels_.emplace(c.name, std::move(observed));
  }
  auto out = plan.apply(train);
  return {std::move(out), std::move(plan)};
}

}  // namespace catenc
