#include "catenc/table.hpp"

#include <algorithm>

#include "catenc/error.hpp"

namespace catenc {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::regression:
      return "regression";
    case TaskKind::binary:
      return "binary";
    case TaskKind::multiclass:
      return "multiclass";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "regression") return TaskKind::regression;
  if (s == "binary") return TaskKind::binary;
  if (s == "multiclass") return TaskKind::multiclass;
  throw InvalidArgument("unknown task kind '" + std::string(s) + "'");
}

Column Column::numeric(std::string name, std::vector<double> values, std::vector<std::uint8_t> missing) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::numeric;
  if (missing.empty()) missing.assign(values.size(), 0);
  c.values = std::move(values);
  c.missing = std::move(missing);
  c.validate();
  return c;
}

Column Column::categorical(std::string name, const std::vector<std::string>& labels,
                           std::vector<std::uint8_t> missing) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::categorical;
  if (missing.empty()) missing.assign(labels.size(), 0);
  if (missing.size() != labels.size()) throw InvalidArgument("missing mask length mismatch in column " + c.name);
  std::unordered_map<std::string, std::int32_t> index;
  c.codes.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (missing[i]) {
      c.codes[i] = kMissingCode;
      continue;
    }
    auto [it, inserted] = index.try_emplace(labels[i], static_cast<std::int32_t>(c.levels.size()));
    if (inserted) c.levels.push_back(labels[i]);
    c.codes[i] = it->second;
  }
  c.missing = std::move(missing);
  return c;
}

Column Column::from_codes(std::string name, std::vector<std::string> levels, std::vector<std::int32_t> codes) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::categorical;
  c.levels = std::move(levels);
  c.missing.resize(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) c.missing[i] = codes[i] == kMissingCode ? 1 : 0;
  c.codes = std::move(codes);
  c.validate();
  return c;
}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
}

const std::string& Column::label(std::size_t row) const {
  if (kind != ColumnKind::categorical) throw InvalidArgument("label() on numeric column " + name);
  if (missing[row]) throw InvalidArgument("label() on missing cell of column " + name);
  return levels[static_cast<std::size_t>(codes[row])];
}

std::vector<std::size_t> Column::level_counts() const {
  std::vector<std::size_t> counts(levels.size(), 0);
  for (std::size_t i = 0; i < codes.size(); ++i)
    if (!missing[i]) ++counts[static_cast<std::size_t>(codes[i])];
  return counts;
}

std::size_t Column::observed_level_count() const {
  auto counts = level_counts();
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto n) { return n > 0; }));
}

std::int32_t Column::find_level(std::string_view lbl) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == lbl) return static_cast<std::int32_t>(i);
  return -1;
}

Column Column::take_rows(std::span<const std::size_t> rows, bool compact_levels) const {
  Column out;
  out.name = name;
  out.kind = kind;
  out.missing.reserve(rows.size());
  for (auto r : rows) out.missing.push_back(missing.at(r));
  if (kind == ColumnKind::numeric) {
    out.values.reserve(rows.size());
    for (auto r : rows) out.values.push_back(values[r]);
    return out;
  }
  out.codes.reserve(rows.size());
  if (!compact_levels) {
    out.levels = levels;
    for (auto r : rows) out.codes.push_back(codes[r]);
    return out;
  }
  std::vector<std::int32_t> remap(levels.size(), kMissingCode);
  for (auto r : rows) {
    const auto code = codes[r];
    if (code == kMissingCode) {
      out.codes.push_back(kMissingCode);
      continue;
    }
    auto& slot = remap[static_cast<std::size_t>(code)];
    if (slot == kMissingCode) {
      slot = static_cast<std::int32_t>(out.levels.size());
      out.levels.push_back(levels[static_cast<std::size_t>(code)]);
    }
    out.codes.push_back(slot);
  }
  return out;
}

void Column::validate() const {
  const auto n = size();
  if (missing.size() != n) throw InvalidArgument("missing mask length mismatch in column " + name);
  if (kind == ColumnKind::categorical) {
    const auto n_levels = static_cast<std::int32_t>(levels.size());
    for (std::size_t i = 0; i < n; ++i) {
      const bool is_missing_code = codes[i] == kMissingCode;
      if (is_missing_code != (missing[i] != 0))
        throw InvalidArgument("missing mask inconsistent with codes in column " + name);
      if (!is_missing_code && (codes[i] < 0 || codes[i] >= n_levels))
        throw InvalidArgument("level code out of range in column " + name);
    }
  }
}

DataTable::DataTable(std::vector<Column> columns, std::size_t target_index, Task task)
    : columns_(std::move(columns)), target_index_(target_index), task_(task) {
  if (columns_.empty()) throw DataError("table has no columns");
  if (target_index_ >= columns_.size()) throw DataError("target index out of range");
  n_rows_ = columns_.front().size();
  for (const auto& c : columns_) {
    if (c.size() != n_rows_) throw DataError("column " + c.name + " has a different row count");
    c.validate();
  }
  const auto& y = target();
  if (y.missing_count() > 0) throw DataError("target column " + y.name + " has missing values");
  if (task_.is_classification()) {
    if (!y.is_categorical()) throw DataError("classification target " + y.name + " must be categorical");
    if (y.levels.size() < 2) throw DataError("classification target needs at least 2 classes");
    if (static_cast<std::size_t>(task_.n_classes) != y.levels.size())
      throw DataError("class count does not match target dictionary");
    if ((task_.kind == TaskKind::binary) != (task_.n_classes == 2))
      throw DataError("binary task requires exactly 2 classes");
  } else if (y.is_categorical()) {
    throw DataError("regression target " + y.name + " must be numeric");
  }
}

DataTable DataTable::with_inferred_task(std::vector<Column> columns, std::size_t target_index) {
  if (target_index >= columns.size()) throw DataError("target index out of range");
  const auto& y = columns[target_index];
  Task task;
  if (y.is_categorical()) {
    const auto c = static_cast<int>(y.observed_level_count());
    if (c < 2) throw DataError("classification target " + y.name + " has fewer than 2 observed classes");
    task = {c == 2 ? TaskKind::binary : TaskKind::multiclass, static_cast<int>(y.levels.size())};
  }
  return DataTable(std::move(columns), target_index, task);
}

std::size_t DataTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return npos;
}

std::vector<std::size_t> DataTable::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (i != target_index_) out.push_back(i);
  return out;
}

DataTable DataTable::take_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (std::size_t i = 0; i < columns_.size(); ++i) cols.push_back(columns_[i].take_rows(rows, i != target_index_));
  return DataTable(std::move(cols), target_index_, task_);
}

std::vector<int> DataTable::class_ids() const {
  const auto& y = target();
  return {y.codes.begin(), y.codes.end()};
}

}  // namespace catenc
